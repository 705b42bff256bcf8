#pragma once

#include "labelkit/coherence.hpp"
#include "labelkit/geo.hpp"
#include "labelkit/lod.hpp"
#include "labelkit/occlusion.hpp"
#include "labelkit/scene.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace labelkit {

enum class EntityKind { Poi, Super };

// Per-element opacity. Which elements a label shows depends on its level of
// detail: rectangle and icon always, the image from Middle up, the text tag
// only at Highest. Super labels show their rectangle and text.
struct ElementAlpha {
    double rectangle = 0.0;
    double icon = 0.0;
    double image = 0.0;
    double text = 0.0;
    friend bool operator==(const ElementAlpha&, const ElementAlpha&) = default;
};

ElementAlpha element_targets(LodLevel level);

struct LabelRecord {
    EntityKind kind = EntityKind::Poi;
    std::string id;
    std::string name;
    std::optional<std::string> group_id;
    std::string category;
    std::string image_ref;
    WorldPosition position;
    WorldPosition normal;
    // Unset for super labels.
    std::optional<LodLevel> lod;
    ElementAlpha alpha;
    Rgb background;
    Extent extent;
    ScalarValue scalar;
    std::vector<LegendEntry> legend;
};

// Bit-exact equality of everything a renderer draws.
bool same_world_content(const LabelRecord& a, const LabelRecord& b);

struct StageTimings {
    double positioning_us = 0.0;
    double aggregation_us = 0.0;
    double occlusion_us = 0.0;
    double lod_us = 0.0;
    double coherence_us = 0.0;
};

struct Instrumentation {
    std::size_t rays_cast = 0;
    std::size_t shifts = 0;
    std::size_t labels_shifted = 0;
    StageTimings stage_us;
};

struct FrameSnapshot {
    std::uint64_t frame_index = 0;
    double timestamp = 0.0;
    DevicePose pose;
    std::vector<LabelRecord> labels;
    Instrumentation instrumentation;
};

// Label records equal, frame index, timestamp and timings aside.
bool same_labels(const FrameSnapshot& a, const FrameSnapshot& b);

nlohmann::json snapshot_to_json(const FrameSnapshot& snapshot);
FrameSnapshot snapshot_from_json(const nlohmann::json& doc);

// Goal state of one frame before any animation is applied.
struct FrameGoals {
    AggregationResult aggregation;
    LodAssignment lods;
    // Resolved bottom-center anchors for every visible entity, keyed by POI
    // id or group id.
    std::map<std::string, WorldPosition> anchors;
    OcclusionReport occlusion;
};

// Pure goal computation: aggregation, LOD and occlusion for a device
// position. Orientation of the device never enters.
FrameGoals compute_goals(const Scene& scene, WorldPosition device, const std::map<std::string, bool>* previous_aggregation,
                         StageTimings* timings = nullptr);

// One engine instance per session; a single caller advances frames.
class LabelEngine {
public:
    explicit LabelEngine(std::shared_ptr<const Scene> scene);

    // Advances to t_now (seconds, nondecreasing) with the given pose and
    // returns the interpolated frame. Throws LabelError on non-monotone time
    // or a non-finite pose.
    FrameSnapshot update_frame(const DevicePose& pose, double t_now);

    // Overrides applied to subsequent frames. Each throws LabelError and
    // leaves the state untouched when the value is invalid.
    void set_thresholds(const LodThresholds& thresholds);
    void set_easing(EasingKind easing);
    void set_transition_duration(double seconds);
    void set_scalar(const std::string& poi_id, double value);

    const Scene& scene() const { return scene_; }
    EasingKind easing() const { return easing_; }
    std::uint64_t frames() const { return frame_; }
    // Number of retargets issued so far, across all animated properties.
    std::size_t retargets() const { return retargets_; }

private:
    struct PoiState {
        Transition<WorldPosition> position;
        Transition<Extent> extent;
        std::array<Transition<double>, 4> alpha;
        LodLevel lod = LodLevel::Highest;
    };
    struct GroupState {
        Transition<double> aggregation;
        Transition<WorldPosition> super_position;
    };

    template <typename T>
    void steer(Transition<T>& transition, const T& goal, double t_now);

    Scene scene_;
    EasingKind easing_ = EasingKind::SineInOut;
    std::vector<PoiState> pois_;
    std::map<std::string, GroupState> groups_;
    std::map<std::string, bool> aggregated_;
    std::map<std::string, WorldPosition> normals_;
    bool started_ = false;
    double last_t_ = 0.0;
    std::uint64_t frame_ = 0;
    std::size_t retargets_ = 0;
};

struct CameraModel {
    DevicePose pose;
    double vertical_fov_deg = 60.0;
    double viewport_width = 1080.0;
    double viewport_height = 1920.0;
};

struct ScreenPoint {
    double x = 0.0;
    double y = 0.0;
};

struct ScreenLabel {
    std::string id;
    // Projected corners in Corner order; meaningful only when on_screen.
    std::array<ScreenPoint, 4> corners{};
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
    // Camera-space depth of the label center.
    double depth = 0.0;
    bool on_screen = false;
};

// Pinhole projection of every label's corners. Labels with a corner behind
// the camera, or whose footprint misses the viewport, are flagged off-screen.
std::vector<ScreenLabel> project_to_screen(const FrameSnapshot& snapshot, const CameraModel& camera);

// Whether two projected labels overlap with positive area. Labels are convex
// quads, so a separating-axis test is exact.
bool screen_overlap(const ScreenLabel& a, const ScreenLabel& b);

} // namespace labelkit
