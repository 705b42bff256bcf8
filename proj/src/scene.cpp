#include "labelkit/scene.hpp"

#include "labelkit/coherence.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace labelkit {

const char* to_string(LodLevel level)
{
    switch (level) {
    case LodLevel::Lowest: return "lowest";
    case LodLevel::Middle: return "middle";
    case LodLevel::Highest: return "highest";
    }
    return "highest";
}

std::optional<LodLevel> lod_from_string(const std::string& name)
{
    if (name == "lowest") return LodLevel::Lowest;
    if (name == "middle") return LodLevel::Middle;
    if (name == "highest") return LodLevel::Highest;
    return std::nullopt;
}

bool ColorScale::valid() const
{
    if (stops.size() < 2) return false;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (!std::isfinite(stops[i].value)) return false;
        if (i > 0 && !(stops[i - 1].value < stops[i].value)) return false;
    }
    return true;
}

ColorScale ColorScale::white_to_red(double low, double high)
{
    return ColorScale{{{low, {255.0, 255.0, 255.0}}, {high, {255.0, 0.0, 0.0}}}};
}

Rgb scalar_to_color(const ColorScale& scale, double value)
{
    const auto& stops = scale.stops;
    if (stops.empty()) return {};
    if (!(value > stops.front().value)) return stops.front().color;
    if (!(value < stops.back().value)) return stops.back().color;

    auto upper = std::upper_bound(stops.begin(), stops.end(), value,
                                  [](double v, const ColorStop& s) { return v < s.value; });
    const ColorStop& hi = *upper;
    const ColorStop& lo = *(upper - 1);
    const double f = (value - lo.value) / (hi.value - lo.value);
    auto mix = [f](double a, double b) { return a + (b - a) * f; };
    return {mix(lo.color.r, hi.color.r), mix(lo.color.g, hi.color.g), mix(lo.color.b, hi.color.b)};
}

const Poi* Scene::find_poi(const std::string& id) const
{
    auto it = std::find_if(pois.begin(), pois.end(), [&](const Poi& p) { return p.id == id; });
    return it == pois.end() ? nullptr : &*it;
}

const LabelGroup* Scene::find_group(const std::string& id) const
{
    auto it = std::find_if(groups.begin(), groups.end(), [&](const LabelGroup& g) { return g.group_id == id; });
    return it == groups.end() ? nullptr : &*it;
}

namespace {

bool extent_ok(const Extent& e) { return std::isfinite(e.width) && std::isfinite(e.height) && e.width > 0 && e.height > 0; }

bool extent_le(const Extent& a, const Extent& b) { return a.width <= b.width && a.height <= b.height; }

} // namespace

std::vector<Violation> validate_scene(const Scene& scene)
{
    std::vector<Violation> out;
    auto add = [&](std::string entity, std::string message) { out.push_back({std::move(entity), std::move(message)}); };

    std::set<std::string> ids;
    for (const Poi& poi : scene.pois) {
        if (poi.id.empty()) add("poi", "empty POI id");
        if (!ids.insert(poi.id).second) add("poi:" + poi.id, "duplicate POI id '" + poi.id + "'");
        if (!poi.position.finite()) add("poi:" + poi.id, "non-finite position");
        if (poi.geo && !poi.geo->valid()) add("poi:" + poi.id, "geodetic coordinate out of range");
        if (!std::isfinite(poi.scalar.value)) add("poi:" + poi.id, "non-finite scalar value");
        if (poi.group_id && !scene.find_group(*poi.group_id))
            add("poi:" + poi.id, "group '" + *poi.group_id + "' does not exist");
    }

    std::set<std::string> group_ids;
    std::map<std::string, std::string> owner;
    for (const LabelGroup& group : scene.groups) {
        const std::string tag = "group:" + group.group_id;
        if (!group_ids.insert(group.group_id).second) add(tag, "duplicate group id '" + group.group_id + "'");
        if (ids.count(group.group_id)) add(tag, "group id '" + group.group_id + "' collides with a POI id");
        if (group.member_ids.empty()) add(tag, "group has no members");
        for (const std::string& member : group.member_ids) {
            const Poi* poi = scene.find_poi(member);
            if (!poi) {
                add(tag, "member '" + member + "' does not resolve to a POI");
                continue;
            }
            auto [it, fresh] = owner.emplace(member, group.group_id);
            if (!fresh && it->second != group.group_id) {
                add(tag, "member '" + member + "' also belongs to group '" + it->second + "'");
            } else if (!fresh) {
                add(tag, "member '" + member + "' listed twice");
            }
            if (poi->group_id && *poi->group_id != group.group_id)
                add(tag, "member '" + member + "' declares group '" + *poi->group_id + "'");
        }
    }
    for (const Poi& poi : scene.pois) {
        if (poi.group_id && scene.find_group(*poi.group_id) && !owner.count(poi.id))
            add("poi:" + poi.id, "not listed as a member of group '" + *poi.group_id + "'");
    }

    const LodThresholds& th = scene.thresholds;
    if (!(th.m1_deg > 0.0)) add("thresholds", "m1 must be positive");
    if (!(th.m1_deg < th.m2_deg)) add("thresholds", "m1 must be smaller than m2");
    if (!(th.m2_deg <= th.t_deg)) add("thresholds", "m2 must not exceed t");

    if (!scene.color_scale.valid()) add("color_scale", "needs at least two strictly increasing stops");

    const LodExtents& ex = scene.label_extents;
    if (!extent_ok(ex.lowest) || !extent_ok(ex.middle) || !extent_ok(ex.highest)) {
        add("label_extents", "extents must be positive");
    } else if (!extent_le(ex.lowest, ex.middle) || !extent_le(ex.middle, ex.highest)) {
        add("label_extents", "extents must grow from lowest to highest");
    }

    if (!(scene.transition_duration_s > 0.0) || !std::isfinite(scene.transition_duration_s))
        add("transition_duration_s", "must be positive");
    if (!easing_from_name(scene.easing)) add("easing", "unknown easing '" + scene.easing + "'");
    if (!(scene.group_margin >= 0.0)) add("group_margin", "must be nonnegative");
    if (!(scene.occlusion.margin_fraction >= 0.0)) add("occlusion", "margin fraction must be nonnegative");
    if (!scene.default_position.finite()) add("default_pose", "non-finite position");
    return out;
}

} // namespace labelkit
