#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace labelkit {

// Raised when an operation's precondition is violated (bad geometry,
// out-of-range parameters, non-monotone time, ...).
class LabelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Right-handed world frame. The ground plane is xz, y points up.
// One world unit is one meter when positions come from geodetic input.
struct WorldPosition {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend WorldPosition operator+(WorldPosition a, WorldPosition b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend WorldPosition operator-(WorldPosition a, WorldPosition b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend WorldPosition operator*(WorldPosition a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    friend bool operator==(const WorldPosition&, const WorldPosition&) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double dot(WorldPosition a, WorldPosition b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double length(WorldPosition a) { return std::sqrt(dot(a, a)); }
inline WorldPosition cross(WorldPosition a, WorldPosition b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Distance in the ground plane, ignoring height.
inline double horizontal_distance(WorldPosition a, WorldPosition b) { return std::hypot(a.x - b.x, a.z - b.z); }

struct GeoCoordinate {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;

    bool valid() const
    {
        return std::isfinite(latitude_deg) && std::isfinite(longitude_deg) && std::abs(latitude_deg) <= 90.0 &&
               std::abs(longitude_deg) <= 180.0;
    }
};

// Channels in [0, 255]; kept as doubles so interpolation is exact.
struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class LodLevel { Lowest = 0, Middle = 1, Highest = 2 };

const char* to_string(LodLevel level);
std::optional<LodLevel> lod_from_string(const std::string& name);

struct Extent {
    double width = 0.0;
    double height = 0.0;
    friend bool operator==(const Extent&, const Extent&) = default;
};

// World-space label size for each level of detail.
struct LodExtents {
    Extent lowest{60.0, 60.0};
    Extent middle{90.0, 90.0};
    Extent highest{120.0, 140.0};

    const Extent& at(LodLevel level) const
    {
        switch (level) {
        case LodLevel::Lowest: return lowest;
        case LodLevel::Middle: return middle;
        case LodLevel::Highest: return highest;
        }
        return highest;
    }

    static LodExtents uniform(Extent e) { return {e, e, e}; }
    friend bool operator==(const LodExtents&, const LodExtents&) = default;
};

// Angles in degrees. t bounds the per-label view volume; m1 and m2 are the
// crowding bounds between the Highest/Middle and Middle/Lowest bands.
struct LodThresholds {
    double t_deg = 45.0;
    double m1_deg = 20.0;
    double m2_deg = 30.0;

    bool valid() const { return 0.0 < m1_deg && m1_deg < m2_deg && m2_deg <= t_deg && std::isfinite(t_deg); }
    friend bool operator==(const LodThresholds&, const LodThresholds&) = default;
};

struct ColorStop {
    double value = 0.0;
    Rgb color;
};

struct ColorScale {
    std::vector<ColorStop> stops;

    bool valid() const;
    static ColorScale white_to_red(double low, double high);
};

// Clamps into [first stop, last stop] and interpolates linearly per channel.
Rgb scalar_to_color(const ColorScale& scale, double value);

struct ScalarValue {
    double value = 0.0;
    std::string unit;
};

struct Poi {
    std::string id;
    std::string name;
    WorldPosition position;
    // Present when the file gave lat/lon; position is then the projected value.
    std::optional<GeoCoordinate> geo;
    std::string category;
    std::string image_ref;
    ScalarValue scalar;
    std::optional<std::string> group_id;
};

struct LabelGroup {
    std::string group_id;
    std::string name;
    std::vector<std::string> member_ids;
};

// Origin of the local frame for geodetic POIs.
struct GeoOrigin {
    GeoCoordinate coordinate;
    double compass_deg = 0.0;
};

struct OcclusionSettings {
    // Vertical clearance added above an occluder, as a fraction of the
    // shifted label's height.
    double margin_fraction = 0.01;
    // Adds a center ray and tests every placed label, not only closer ones.
    bool strict = false;
};

struct Scene {
    std::vector<Poi> pois;
    std::vector<LabelGroup> groups;
    LodThresholds thresholds;
    ColorScale color_scale = ColorScale::white_to_red(0.0, 120.0);
    LodExtents label_extents;
    double transition_duration_s = 1.0;
    std::string easing = "sine-in-out";
    double group_margin = 50.0;
    OcclusionSettings occlusion;
    std::optional<GeoOrigin> geo_origin;
    // Pose a client starts from before it sends its own.
    WorldPosition default_position;
    double default_yaw_deg = 0.0;
    double default_pitch_deg = 0.0;

    const Poi* find_poi(const std::string& id) const;
    const LabelGroup* find_group(const std::string& id) const;
};

struct Violation {
    std::string entity;
    std::string message;
};

// Empty iff every structural invariant holds.
std::vector<Violation> validate_scene(const Scene& scene);

} // namespace labelkit
