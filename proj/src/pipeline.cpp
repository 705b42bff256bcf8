#include "labelkit/pipeline.hpp"

#include "labelkit/scene_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace labelkit {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double micros_since(Clock::time_point start)
{
    return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

bool same_scalar(const ScalarValue& a, const ScalarValue& b) { return a.value == b.value && a.unit == b.unit; }

bool same_legend(const std::vector<LegendEntry>& a, const std::vector<LegendEntry>& b)
{
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const LegendEntry& x, const LegendEntry& y) {
        return x.poi_id == y.poi_id && x.name == y.name && x.value == y.value && x.color == y.color;
    });
}

const char* kind_name(EntityKind kind) { return kind == EntityKind::Super ? "super" : "poi"; }

json extent_json(const Extent& e) { return {{"width", e.width}, {"height", e.height}}; }

} // namespace

ElementAlpha element_targets(LodLevel level)
{
    switch (level) {
    case LodLevel::Lowest: return {1.0, 1.0, 0.0, 0.0};
    case LodLevel::Middle: return {1.0, 1.0, 1.0, 0.0};
    case LodLevel::Highest: return {1.0, 1.0, 1.0, 1.0};
    }
    return {1.0, 1.0, 1.0, 1.0};
}

bool same_world_content(const LabelRecord& a, const LabelRecord& b)
{
    return a.kind == b.kind && a.id == b.id && a.name == b.name && a.group_id == b.group_id && a.category == b.category &&
           a.image_ref == b.image_ref && a.position == b.position && a.normal == b.normal && a.lod == b.lod &&
           a.alpha == b.alpha && a.background == b.background && a.extent == b.extent && same_scalar(a.scalar, b.scalar) &&
           same_legend(a.legend, b.legend);
}

bool same_labels(const FrameSnapshot& a, const FrameSnapshot& b)
{
    return std::equal(a.labels.begin(), a.labels.end(), b.labels.begin(), b.labels.end(), same_world_content);
}

json snapshot_to_json(const FrameSnapshot& snapshot)
{
    json labels = json::array();
    for (const LabelRecord& r : snapshot.labels) {
        json j{{"kind", kind_name(r.kind)},
               {"id", r.id},
               {"name", r.name},
               {"group", r.group_id ? json(*r.group_id) : json(nullptr)},
               {"category", r.category},
               {"image", r.image_ref},
               {"position", position_to_json(r.position)},
               {"normal", position_to_json(r.normal)},
               {"lod", r.lod ? json(to_string(*r.lod)) : json(nullptr)},
               {"alpha", {{"rectangle", r.alpha.rectangle}, {"icon", r.alpha.icon}, {"image", r.alpha.image}, {"text", r.alpha.text}}},
               {"background", to_hex_color(r.background)},
               {"background_rgb", {r.background.r, r.background.g, r.background.b}},
               {"extent", extent_json(r.extent)},
               {"scalar", {{"value", r.scalar.value}, {"unit", r.scalar.unit}}}};
        if (r.kind == EntityKind::Super) {
            json legend = json::array();
            for (const LegendEntry& e : r.legend)
                legend.push_back({{"id", e.poi_id}, {"name", e.name}, {"value", e.value}, {"color", to_hex_color(e.color)},
                                  {"color_rgb", {e.color.r, e.color.g, e.color.b}}});
            j["legend"] = legend;
        }
        labels.push_back(std::move(j));
    }
    const Instrumentation& in = snapshot.instrumentation;
    return json{{"schema", kSchemaVersion},
                {"frame", snapshot.frame_index},
                {"timestamp", snapshot.timestamp},
                {"pose", pose_to_json(snapshot.pose)},
                {"labels", labels},
                {"instrumentation",
                 {{"rays_cast", in.rays_cast},
                  {"shifts", in.shifts},
                  {"labels_shifted", in.labels_shifted},
                  {"stage_us",
                   {{"positioning", in.stage_us.positioning_us},
                    {"aggregation", in.stage_us.aggregation_us},
                    {"occlusion", in.stage_us.occlusion_us},
                    {"lod", in.stage_us.lod_us},
                    {"coherence", in.stage_us.coherence_us}}}}}};
}

FrameSnapshot snapshot_from_json(const json& doc)
{
    try {
        if (doc.at("schema").get<int>() != kSchemaVersion) throw FormatError("unsupported snapshot schema");
        FrameSnapshot s;
        s.frame_index = doc.at("frame").get<std::uint64_t>();
        s.timestamp = doc.at("timestamp").get<double>();
        s.pose = pose_from_json(doc.at("pose"));
        for (const json& j : doc.at("labels")) {
            LabelRecord r;
            r.kind = j.at("kind").get<std::string>() == "super" ? EntityKind::Super : EntityKind::Poi;
            r.id = j.at("id").get<std::string>();
            r.name = j.at("name").get<std::string>();
            if (!j.at("group").is_null()) r.group_id = j["group"].get<std::string>();
            r.category = j.at("category").get<std::string>();
            r.image_ref = j.at("image").get<std::string>();
            r.position = position_from_json(j.at("position"));
            r.normal = position_from_json(j.at("normal"));
            if (!j.at("lod").is_null()) r.lod = lod_from_string(j["lod"].get<std::string>());
            const json& a = j.at("alpha");
            r.alpha = {a.at("rectangle").get<double>(), a.at("icon").get<double>(), a.at("image").get<double>(),
                       a.at("text").get<double>()};
            const json& rgb = j.at("background_rgb");
            r.background = {rgb.at(0).get<double>(), rgb.at(1).get<double>(), rgb.at(2).get<double>()};
            r.extent = {j.at("extent").at("width").get<double>(), j.at("extent").at("height").get<double>()};
            r.scalar = {j.at("scalar").at("value").get<double>(), j.at("scalar").at("unit").get<std::string>()};
            if (j.contains("legend")) {
                for (const json& e : j["legend"]) {
                    const json& c = e.at("color_rgb");
                    r.legend.push_back({e.at("id").get<std::string>(), e.at("name").get<std::string>(),
                                        e.at("value").get<double>(),
                                        {c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>()}});
                }
            }
            s.labels.push_back(std::move(r));
        }
        const json& in = doc.at("instrumentation");
        s.instrumentation.rays_cast = in.at("rays_cast").get<std::size_t>();
        s.instrumentation.shifts = in.at("shifts").get<std::size_t>();
        s.instrumentation.labels_shifted = in.at("labels_shifted").get<std::size_t>();
        const json& st = in.at("stage_us");
        s.instrumentation.stage_us = {st.at("positioning").get<double>(), st.at("aggregation").get<double>(),
                                      st.at("occlusion").get<double>(), st.at("lod").get<double>(),
                                      st.at("coherence").get<double>()};
        return s;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed snapshot: ") + e.what());
    }
}

FrameGoals compute_goals(const Scene& scene, WorldPosition device, const std::map<std::string, bool>* previous_aggregation,
                         StageTimings* timings)
{
    FrameGoals goals;
    StageTimings local;

    auto t = Clock::now();
    goals.aggregation = aggregate_groups(scene, device, previous_aggregation);
    local.aggregation_us = micros_since(t);

    // Visible set: individual POIs plus one super label per aggregated group.
    t = Clock::now();
    std::vector<Anchor> anchors;
    std::vector<LodCandidate> candidates;
    const LodExtents super_extents = LodExtents::uniform(scene.label_extents.highest);
    for (const Poi& p : scene.pois) {
        if (goals.aggregation.hidden_poi_ids.count(p.id)) continue;
        anchors.push_back({p.id, p.position});
        candidates.push_back({p.id, p.position, scene.label_extents});
    }
    for (const SuperLabel& s : goals.aggregation.super_labels) {
        anchors.push_back({s.group_id, s.position});
        candidates.push_back({s.group_id, s.position, super_extents});
    }
    const SortedLabels order = sort_by_distance(anchors, device);
    local.positioning_us = micros_since(t);

    t = Clock::now();
    goals.lods = assign_lods(order, candidates, scene.thresholds, device);
    local.lod_us = micros_since(t);

    // Occlusion runs on goal extents: each label at the size of its new level.
    t = Clock::now();
    std::map<std::string, const LodCandidate*> by_id;
    for (const LodCandidate& c : candidates) by_id.emplace(c.id, &c);
    std::vector<BillboardRect> rects;
    rects.reserve(order.entries.size());
    for (const SortedEntry& e : order.entries) {
        const LodCandidate& c = *by_id.at(e.id);
        rects.push_back(make_billboard(c.position, c.extents.at(goals.lods.levels.at(e.id)), device));
    }
    OcclusionResult resolved = resolve_all(order, rects, device, scene.occlusion);
    for (std::size_t k = 0; k < order.entries.size(); ++k)
        goals.anchors.emplace(order.entries[k].id, resolved.placed[k].rect.anchor);
    goals.occlusion = std::move(resolved.report);
    local.occlusion_us = micros_since(t);

    if (timings) *timings = local;
    return goals;
}

LabelEngine::LabelEngine(std::shared_ptr<const Scene> scene) : scene_(*scene)
{
    const auto violations = validate_scene(scene_);
    if (!violations.empty())
        throw LabelError("scene is invalid: " + violations.front().entity + ": " + violations.front().message);
    easing_ = easing_from_name(scene_.easing).value_or(EasingKind::SineInOut);
    pois_.resize(scene_.pois.size());
}

template <typename T>
void LabelEngine::steer(Transition<T>& transition, const T& goal, double t_now)
{
    if (transition.goal == goal) return;
    transition = retarget(transition, goal, t_now);
    transition.easing = easing_;
    transition.t_transition = scene_.transition_duration_s;
    ++retargets_;
}

FrameSnapshot LabelEngine::update_frame(const DevicePose& pose, double t_now)
{
    if (!pose.finite() || !std::isfinite(t_now)) throw LabelError("update_frame: non-finite pose or time");
    if (started_ && t_now < last_t_) throw LabelError("update_frame: time went backwards");

    FrameSnapshot snap;
    snap.frame_index = frame_;
    snap.timestamp = t_now;
    snap.pose = pose;
    snap.pose.yaw_deg = normalize_yaw(pose.yaw_deg);

    StageTimings timings;
    const FrameGoals goals = compute_goals(scene_, pose.position, started_ ? &aggregated_ : nullptr, &timings);

    const auto coherence_start = Clock::now();
    const double duration = scene_.transition_duration_s;
    std::map<std::string, const SuperLabel*> supers;
    for (const SuperLabel& s : goals.aggregation.super_labels) supers.emplace(s.group_id, &s);

    for (std::size_t k = 0; k < scene_.pois.size(); ++k) {
        const Poi& poi = scene_.pois[k];
        PoiState& st = pois_[k];
        auto anchor = goals.anchors.find(poi.id);
        if (anchor == goals.anchors.end()) {
            // Hidden in a super label: keep the individual goals frozen.
            if (!started_) {
                st.position = Transition<WorldPosition>::settled(poi.position, t_now, duration, easing_);
                st.extent = Transition<Extent>::settled(scene_.label_extents.highest, t_now, duration, easing_);
                const ElementAlpha a = element_targets(LodLevel::Highest);
                const std::array<double, 4> v{a.rectangle, a.icon, a.image, a.text};
                for (std::size_t e = 0; e < 4; ++e) st.alpha[e] = Transition<double>::settled(v[e], t_now, duration, easing_);
            }
            continue;
        }
        const LodLevel level = goals.lods.levels.at(poi.id);
        const Extent extent = scene_.label_extents.at(level);
        const ElementAlpha a = element_targets(level);
        const std::array<double, 4> alpha_goal{a.rectangle, a.icon, a.image, a.text};
        if (!started_) {
            st.position = Transition<WorldPosition>::settled(anchor->second, t_now, duration, easing_);
            st.extent = Transition<Extent>::settled(extent, t_now, duration, easing_);
            for (std::size_t e = 0; e < 4; ++e) st.alpha[e] = Transition<double>::settled(alpha_goal[e], t_now, duration, easing_);
        } else {
            steer(st.position, anchor->second, t_now);
            steer(st.extent, extent, t_now);
            for (std::size_t e = 0; e < 4; ++e) steer(st.alpha[e], alpha_goal[e], t_now);
        }
        st.lod = level;
    }

    for (const LabelGroup& g : scene_.groups) {
        const bool aggregated = goals.aggregation.aggregated.at(g.group_id);
        auto anchor = goals.anchors.find(g.group_id);
        auto [it, fresh] = groups_.try_emplace(g.group_id);
        GroupState& gs = it->second;
        if (fresh) {
            const WorldPosition start = anchor != goals.anchors.end() ? anchor->second : group_centroid(scene_, g);
            gs.aggregation = Transition<double>::settled(aggregated ? 1.0 : 0.0, t_now, duration, easing_);
            gs.super_position = Transition<WorldPosition>::settled(start, t_now, duration, easing_);
            continue;
        }
        steer(gs.aggregation, aggregated ? 1.0 : 0.0, t_now);
        if (anchor != goals.anchors.end()) steer(gs.super_position, anchor->second, t_now);
    }
    aggregated_ = goals.aggregation.aggregated;

    const WorldPosition device = pose.position;
    auto facing = [&](const std::string& id, WorldPosition at) {
        auto [it, fresh] = normals_.try_emplace(id, WorldPosition{0.0, 0.0, 1.0});
        it->second = orient_billboard(at, device, it->second);
        return it->second;
    };

    for (std::size_t k = 0; k < scene_.pois.size(); ++k) {
        const Poi& poi = scene_.pois[k];
        const PoiState& st = pois_[k];
        double merged = 0.0;
        WorldPosition super_at;
        if (poi.group_id) {
            const GroupState& gs = groups_.at(*poi.group_id);
            merged = gs.aggregation.value(t_now);
            super_at = gs.super_position.value(t_now);
        }
        if (merged >= 1.0) continue;

        const AggregationBlend blend = aggregate_transition(st.position.value(t_now), super_at, merged);
        LabelRecord r;
        r.kind = EntityKind::Poi;
        r.id = poi.id;
        r.name = poi.name;
        r.group_id = poi.group_id;
        r.category = poi.category;
        r.image_ref = poi.image_ref;
        r.position = merged > 0.0 ? blend.member_position : st.position.value(t_now);
        r.normal = facing(poi.id, r.position);
        r.lod = st.lod;
        r.alpha = {st.alpha[0].value(t_now) * blend.member_alpha, st.alpha[1].value(t_now) * blend.member_alpha,
                   st.alpha[2].value(t_now) * blend.member_alpha, st.alpha[3].value(t_now) * blend.member_alpha};
        r.background = scalar_to_color(scene_.color_scale, poi.scalar.value);
        r.extent = st.extent.value(t_now);
        r.scalar = poi.scalar;
        snap.labels.push_back(std::move(r));
    }

    for (const LabelGroup& g : scene_.groups) {
        const GroupState& gs = groups_.at(g.group_id);
        const double shown = gs.aggregation.value(t_now);
        if (shown <= 0.0) continue;
        const SuperLabel s = make_super_label(scene_, g);
        LabelRecord r;
        r.kind = EntityKind::Super;
        r.id = g.group_id;
        r.name = g.name;
        r.group_id = g.group_id;
        r.position = gs.super_position.value(t_now);
        r.normal = facing("group:" + g.group_id, r.position);
        r.alpha = {shown, 0.0, 0.0, shown};
        r.background = s.color;
        r.extent = scene_.label_extents.highest;
        r.scalar = {s.aggregate_value, s.unit};
        r.legend = s.legend;
        snap.labels.push_back(std::move(r));
    }
    timings.coherence_us = micros_since(coherence_start);

    snap.instrumentation.rays_cast = goals.occlusion.rays_cast;
    snap.instrumentation.shifts = goals.occlusion.shifts_performed;
    snap.instrumentation.labels_shifted = goals.occlusion.labels_shifted;
    snap.instrumentation.stage_us = timings;

    started_ = true;
    last_t_ = t_now;
    ++frame_;
    return snap;
}

void LabelEngine::set_thresholds(const LodThresholds& thresholds)
{
    if (!thresholds.valid()) throw LabelError("thresholds must satisfy 0 < m1 < m2 <= t");
    scene_.thresholds = thresholds;
}

void LabelEngine::set_easing(EasingKind easing) { easing_ = easing; }

void LabelEngine::set_transition_duration(double seconds)
{
    if (!(seconds > 0.0) || !std::isfinite(seconds)) throw LabelError("transition duration must be positive");
    scene_.transition_duration_s = seconds;
}

void LabelEngine::set_scalar(const std::string& poi_id, double value)
{
    if (!std::isfinite(value)) throw LabelError("scalar value must be finite");
    auto it = std::find_if(scene_.pois.begin(), scene_.pois.end(), [&](const Poi& p) { return p.id == poi_id; });
    if (it == scene_.pois.end()) throw LabelError("unknown POI '" + poi_id + "'");
    it->scalar.value = value;
}

std::vector<ScreenLabel> project_to_screen(const FrameSnapshot& snapshot, const CameraModel& camera)
{
    const double yaw = deg_to_rad(camera.pose.yaw_deg);
    const double pitch = deg_to_rad(camera.pose.pitch_deg);
    const WorldPosition forward{std::sin(yaw) * std::cos(pitch), std::sin(pitch), -std::cos(yaw) * std::cos(pitch)};
    const WorldPosition right{std::cos(yaw), 0.0, std::sin(yaw)};
    const WorldPosition up = cross(right, forward);
    const double focal = camera.viewport_height * 0.5 / std::tan(deg_to_rad(camera.vertical_fov_deg) * 0.5);
    const double cx = camera.viewport_width * 0.5;
    const double cy = camera.viewport_height * 0.5;
    constexpr double kNear = 1e-6;

    std::vector<ScreenLabel> out;
    out.reserve(snapshot.labels.size());
    for (const LabelRecord& r : snapshot.labels) {
        const BillboardRect rect{r.position, r.extent.width, r.extent.height, r.normal};
        ScreenLabel s;
        s.id = r.id;
        const WorldPosition center = r.position + WorldPosition{0.0, r.extent.height * 0.5, 0.0};
        s.depth = dot(center - camera.pose.position, forward);
        bool behind = false;
        const auto corners = rect_corners(rect);
        for (std::size_t k = 0; k < 4; ++k) {
            const WorldPosition rel = corners[k] - camera.pose.position;
            const double depth = dot(rel, forward);
            if (depth <= kNear) {
                behind = true;
                break;
            }
            s.corners[k] = {cx + focal * dot(rel, right) / depth, cy - focal * dot(rel, up) / depth};
        }
        if (!behind) {
            s.min_x = s.max_x = s.corners[0].x;
            s.min_y = s.max_y = s.corners[0].y;
            for (const ScreenPoint& p : s.corners) {
                s.min_x = std::min(s.min_x, p.x);
                s.max_x = std::max(s.max_x, p.x);
                s.min_y = std::min(s.min_y, p.y);
                s.max_y = std::max(s.max_y, p.y);
            }
            s.on_screen = s.max_x > 0.0 && s.min_x < camera.viewport_width && s.max_y > 0.0 && s.min_y < camera.viewport_height;
        }
        out.push_back(std::move(s));
    }
    return out;
}

bool screen_overlap(const ScreenLabel& a, const ScreenLabel& b)
{
    // Corner order BL, BR, TL, TR; walk them as a polygon.
    auto polygon = [](const ScreenLabel& s) {
        return std::array<ScreenPoint, 4>{s.corners[BottomLeft], s.corners[BottomRight], s.corners[TopRight], s.corners[TopLeft]};
    };
    const auto pa = polygon(a);
    const auto pb = polygon(b);
    const double scale = std::max({a.max_x - a.min_x, a.max_y - a.min_y, b.max_x - b.min_x, b.max_y - b.min_y, 1.0});
    const double tol = 1e-9 * scale;

    auto separated_on_edges = [&](const std::array<ScreenPoint, 4>& poly) {
        for (std::size_t k = 0; k < 4; ++k) {
            const ScreenPoint& p = poly[k];
            const ScreenPoint& q = poly[(k + 1) % 4];
            const double nx = -(q.y - p.y);
            const double ny = q.x - p.x;
            const double len = std::hypot(nx, ny);
            if (len == 0.0) continue;
            double amin = 1e300, amax = -1e300, bmin = 1e300, bmax = -1e300;
            for (const ScreenPoint& v : pa) {
                const double d = (v.x * nx + v.y * ny) / len;
                amin = std::min(amin, d);
                amax = std::max(amax, d);
            }
            for (const ScreenPoint& v : pb) {
                const double d = (v.x * nx + v.y * ny) / len;
                bmin = std::min(bmin, d);
                bmax = std::max(bmax, d);
            }
            if (amax <= bmin + tol || bmax <= amin + tol) return true;
        }
        return false;
    };
    return !separated_on_edges(pa) && !separated_on_edges(pb);
}

} // namespace labelkit
