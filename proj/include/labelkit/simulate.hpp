#pragma once

#include "labelkit/geo.hpp"
#include "labelkit/scene.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <vector>

namespace labelkit {

struct PoseKeyframe {
    double t = 0.0;
    DevicePose pose;
};

// Keyframes with strictly increasing timestamps, linearly interpolated.
struct PoseScript {
    std::vector<PoseKeyframe> keyframes;
};

// Accepts {"keyframes": [{"t": s, "pose": {...}}, ...]} or the bare array.
// Throws FormatError for malformed input or non-increasing timestamps.
PoseScript pose_script_from_json(const nlohmann::json& doc);
PoseScript load_pose_script(const std::filesystem::path& path);

// Holds the first pose before the first keyframe and the last one after the
// last. Yaw takes the shorter way round.
DevicePose pose_at(const PoseScript& script, double t);

struct SimulateOptions {
    double fps = 30.0;
    // Seconds of simulated time; frames are emitted at k / fps for
    // k = 0 .. round(duration * fps) - 1.
    double duration_s = 2.0;
    // Zero the per-stage timings so output is byte-for-byte reproducible.
    bool timings = true;
};

// Writes one FrameSnapshot JSON object per line. Returns the frame count.
std::size_t simulate(const Scene& scene, const PoseScript& script, const SimulateOptions& options, std::ostream& out);

} // namespace labelkit
