#include "labelkit/simulate.hpp"

#include "labelkit/pipeline.hpp"
#include "labelkit/scene_io.hpp"

#include <cmath>
#include <fstream>
#include <memory>

namespace labelkit {

using nlohmann::json;

PoseScript pose_script_from_json(const json& doc)
{
    try {
        const json& frames = doc.is_array() ? doc : doc.at("keyframes");
        if (!frames.is_array() || frames.empty()) throw FormatError("pose script needs at least one keyframe");
        PoseScript script;
        for (const json& k : frames) {
            PoseKeyframe kf{k.at("t").get<double>(), pose_from_json(k.at("pose"))};
            if (!std::isfinite(kf.t)) throw FormatError("keyframe time must be finite");
            if (!script.keyframes.empty() && !(kf.t > script.keyframes.back().t))
                throw FormatError("keyframe times must increase strictly");
            script.keyframes.push_back(kf);
        }
        return script;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed pose script: ") + e.what());
    }
}

PoseScript load_pose_script(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot read " + path.string());
    try {
        return pose_script_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

DevicePose pose_at(const PoseScript& script, double t)
{
    const auto& k = script.keyframes;
    if (k.empty()) throw LabelError("empty pose script");
    if (t <= k.front().t) return k.front().pose;
    if (t >= k.back().t) return k.back().pose;
    std::size_t i = 1;
    while (k[i].t < t) ++i;
    const PoseKeyframe& a = k[i - 1];
    const PoseKeyframe& b = k[i];
    const double e = (t - a.t) / (b.t - a.t);

    DevicePose p = a.pose;
    p.position = a.pose.position + (b.pose.position - a.pose.position) * e;
    double dyaw = std::fmod(b.pose.yaw_deg - a.pose.yaw_deg, 360.0);
    if (dyaw > 180.0) dyaw -= 360.0;
    if (dyaw < -180.0) dyaw += 360.0;
    p.yaw_deg = normalize_yaw(a.pose.yaw_deg + dyaw * e);
    p.pitch_deg = a.pose.pitch_deg + (b.pose.pitch_deg - a.pose.pitch_deg) * e;
    return p;
}

std::size_t simulate(const Scene& scene, const PoseScript& script, const SimulateOptions& options, std::ostream& out)
{
    if (!(options.fps >= 1.0 && options.fps <= 240.0)) throw LabelError("fps must lie in [1, 240]");
    if (!(options.duration_s >= 0.0) || !std::isfinite(options.duration_s)) throw LabelError("duration must be nonnegative");

    LabelEngine engine(std::make_shared<const Scene>(scene));
    const auto frames = static_cast<std::size_t>(std::llround(options.duration_s * options.fps));
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = static_cast<double>(k) / options.fps;
        FrameSnapshot snap = engine.update_frame(pose_at(script, t), t);
        if (!options.timings) snap.instrumentation.stage_us = {};
        out << snapshot_to_json(snap).dump() << '\n';
    }
    return frames;
}

} // namespace labelkit
