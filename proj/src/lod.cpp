#include "labelkit/lod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace labelkit {

double angular_width(double width, double horizontal_dist)
{
    if (!(horizontal_dist > 0.0)) throw LabelError("angular_width: label stands at the device position");
    return rad_to_deg(2.0 * std::atan(width * 0.5 / horizontal_dist));
}

LodAssignment assign_lods(const SortedLabels& order, std::span<const LodCandidate> candidates,
                          const LodThresholds& thresholds, WorldPosition device)
{
    std::unordered_map<std::string, const LodCandidate*> by_id;
    for (const LodCandidate& c : candidates) by_id.emplace(c.id, &c);

    struct Walked {
        double dir_x = 0.0;
        double dir_z = 0.0;
        double width_deg = 0.0;
        bool has_direction = false;
    };
    std::vector<Walked> walked;
    walked.reserve(order.entries.size());

    const double cos_t = std::cos(deg_to_rad(thresholds.t_deg));
    LodAssignment out;
    for (const SortedEntry& entry : order.entries) {
        auto it = by_id.find(entry.id);
        if (it == by_id.end()) throw LabelError("assign_lods: no candidate for '" + entry.id + "'");
        const LodCandidate& c = *it->second;

        const double dx = c.position.x - device.x;
        const double dz = c.position.z - device.z;
        const double dist = std::hypot(dx, dz);
        Walked w;
        double crowding = 0.0;
        if (dist > 0.0) {
            w.has_direction = true;
            w.dir_x = dx / dist;
            w.dir_z = dz / dist;
            for (const Walked& prev : walked) {
                if (!prev.has_direction) continue;
                const double cosine = prev.dir_x * w.dir_x + prev.dir_z * w.dir_z;
                if (cosine >= cos_t) crowding += prev.width_deg;
            }
        }

        LodLevel level = LodLevel::Highest;
        if (crowding >= thresholds.m2_deg) level = LodLevel::Lowest;
        else if (crowding >= thresholds.m1_deg) level = LodLevel::Middle;

        if (w.has_direction) w.width_deg = angular_width(c.extents.at(level).width, dist);
        walked.push_back(w);
        out.levels[c.id] = level;
        out.crowding[c.id] = crowding;
    }
    return out;
}

WorldPosition group_centroid(const Scene& scene, const LabelGroup& group)
{
    double sx = 0.0, sz = 0.0;
    std::size_t n = 0;
    for (const std::string& id : group.member_ids) {
        if (const Poi* p = scene.find_poi(id)) {
            sx += p->position.x;
            sz += p->position.z;
            ++n;
        }
    }
    if (n == 0) return {};
    return {sx / double(n), 0.0, sz / double(n)};
}

SuperLabel make_super_label(const Scene& scene, const LabelGroup& group)
{
    SuperLabel s;
    s.group_id = group.group_id;
    s.name = group.name;
    s.position = group_centroid(scene, group);
    double sum = 0.0;
    for (const std::string& id : group.member_ids) {
        const Poi* p = scene.find_poi(id);
        if (!p) continue;
        sum += p->scalar.value;
        if (s.unit.empty()) s.unit = p->scalar.unit;
        s.legend.push_back({p->id, p->name, p->scalar.value, scalar_to_color(scene.color_scale, p->scalar.value)});
    }
    if (!s.legend.empty()) s.aggregate_value = sum / double(s.legend.size());
    s.color = scalar_to_color(scene.color_scale, s.aggregate_value);
    return s;
}

namespace {

bool inside_region(const Scene& scene, const LabelGroup& group, WorldPosition device, double margin)
{
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_z = min_x, max_z = -min_x;
    for (const std::string& id : group.member_ids) {
        if (const Poi* p = scene.find_poi(id)) {
            min_x = std::min(min_x, p->position.x);
            max_x = std::max(max_x, p->position.x);
            min_z = std::min(min_z, p->position.z);
            max_z = std::max(max_z, p->position.z);
        }
    }
    return device.x >= min_x - margin && device.x <= max_x + margin && device.z >= min_z - margin &&
           device.z <= max_z + margin;
}

} // namespace

AggregationResult aggregate_groups(const Scene& scene, WorldPosition device, const std::map<std::string, bool>* previous)
{
    AggregationResult out;
    double best = std::numeric_limits<double>::infinity();
    for (const LabelGroup& g : scene.groups) {
        if (g.member_ids.empty()) continue;
        const double d = horizontal_distance(group_centroid(scene, g), device);
        if (d < best || (d == best && out.closest_group && g.group_id < *out.closest_group)) {
            best = d;
            out.closest_group = g.group_id;
        }
    }

    for (const LabelGroup& g : scene.groups) {
        double margin = scene.group_margin;
        if (previous) {
            auto it = previous->find(g.group_id);
            if (it != previous->end()) margin *= it->second ? 0.9 : 1.1;
        }
        const bool closest = out.closest_group && *out.closest_group == g.group_id;
        const bool aggregate = !g.member_ids.empty() && !closest && !inside_region(scene, g, device, margin);
        out.aggregated[g.group_id] = aggregate;
        if (!aggregate) continue;
        out.super_labels.push_back(make_super_label(scene, g));
        for (const std::string& id : g.member_ids) out.hidden_poi_ids.insert(id);
    }
    return out;
}

} // namespace labelkit
