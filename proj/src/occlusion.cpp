#include "labelkit/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>

namespace labelkit {

namespace {

constexpr double kParallelEps = 1e-12;

WorldPosition normalized(WorldPosition v)
{
    const double len = length(v);
    return {v.x / len, v.y / len, v.z / len};
}

// Where a horizontal direction from the device meets a billboard's plane:
// horizontal distance along the direction and lateral offset from the anchor.
struct HorizontalHit {
    double distance = 0.0;
    double lateral = 0.0;
};

std::optional<HorizontalHit> horizontal_hit(const BillboardRect& rect, double ux, double uz, WorldPosition device)
{
    const double denom = ux * rect.normal.x + uz * rect.normal.z;
    if (!(denom < -kParallelEps)) return std::nullopt;
    const double num = (rect.anchor.x - device.x) * rect.normal.x + (rect.anchor.z - device.z) * rect.normal.z;
    const double dist = num / denom;
    if (!(dist > 0.0)) return std::nullopt;
    const WorldPosition r = rect.right();
    const double lateral = (device.x + ux * dist - rect.anchor.x) * r.x + (device.z + uz * dist - rect.anchor.z) * r.z;
    return HorizontalHit{dist, lateral};
}

struct Direction {
    double x = 0.0;
    double z = 0.0;
};

// Horizontal directions from the device through the rectangle's left and
// right edges.
std::array<Direction, 2> edge_directions(const BillboardRect& rect, WorldPosition device)
{
    const WorldPosition r = rect.right();
    std::array<Direction, 2> out;
    for (int k = 0; k < 2; ++k) {
        const double side = k == 0 ? -0.5 : 0.5;
        const double dx = rect.anchor.x + r.x * rect.width * side - device.x;
        const double dz = rect.anchor.z + r.z * rect.width * side - device.z;
        const double len = std::hypot(dx, dz);
        out[k] = len > 0.0 ? Direction{dx / len, dz / len} : Direction{};
    }
    return out;
}

bool within_span(const HorizontalHit& hit, const BillboardRect& rect, double slack)
{
    return std::abs(hit.lateral) <= rect.width * 0.5 + slack;
}

// True when no corner ray of `label` can ever hit `other` again, however far
// `label` is raised: each edge direction either misses `other` sideways or
// already passes over its top.
bool permanently_clear(const BillboardRect& label, const BillboardRect& other, WorldPosition device)
{
    for (const Direction& u : edge_directions(label, device)) {
        const auto on_other = horizontal_hit(other, u.x, u.z, device);
        if (!on_other || !(std::abs(on_other->lateral) < other.width * 0.5)) continue;
        const auto on_label = horizontal_hit(label, u.x, u.z, device);
        if (!on_label) return false;
        const double height_at_other = device.y + (label.anchor.y - device.y) * on_other->distance / on_label->distance;
        if (height_at_other < other.top()) return false;
    }
    return true;
}

bool any_ray_hits(std::span<const Ray> rays, const BillboardRect& rect)
{
    return std::any_of(rays.begin(), rays.end(), [&](const Ray& r) { return ray_hits_rect(r, rect).has_value(); });
}

std::size_t ray_set(const BillboardRect& rect, WorldPosition device, bool strict, std::array<Ray, 5>& rays)
{
    const auto corners = corner_rays(rect, device);
    std::copy(corners.begin(), corners.end(), rays.begin());
    if (!strict) return 4;
    const WorldPosition center = rect.anchor + WorldPosition{0.0, rect.height * 0.5, 0.0};
    rays[4] = Ray{device, normalized(center - device)};
    return 5;
}

// Strict mode also looks from the candidate's side: a smaller label in front
// can sit entirely inside `label` without any of `label`'s corners touching it.
bool reverse_hit(const BillboardRect& label, const BillboardRect& candidate, WorldPosition device, RayStats* stats)
{
    const auto back = corner_rays(candidate, device);
    if (stats) stats->rays_cast += back.size();
    return any_ray_hits(back, label);
}

} // namespace

BillboardRect make_billboard(WorldPosition anchor, Extent extent, WorldPosition device)
{
    return BillboardRect{anchor, extent.width, extent.height, orient_billboard(anchor, device)};
}

std::array<WorldPosition, 4> rect_corners(const BillboardRect& rect)
{
    const WorldPosition half = rect.right() * (rect.width * 0.5);
    const WorldPosition up{0.0, rect.height, 0.0};
    return {rect.anchor - half, rect.anchor + half, rect.anchor - half + up, rect.anchor + half + up};
}

std::array<Ray, 4> corner_rays(const BillboardRect& rect, WorldPosition device)
{
    const double plane_offset = dot(device - rect.anchor, rect.normal);
    if (!(std::abs(plane_offset) > kParallelEps)) throw LabelError("corner_rays: device lies on the label plane");
    std::array<Ray, 4> rays;
    const auto corners = rect_corners(rect);
    for (std::size_t k = 0; k < 4; ++k) rays[k] = Ray{device, normalized(corners[k] - device)};
    return rays;
}

std::optional<double> ray_hits_rect(const Ray& ray, const BillboardRect& rect)
{
    const double denom = dot(ray.direction, rect.normal);
    if (std::abs(denom) < kParallelEps) return std::nullopt;
    const double t = dot(rect.anchor - ray.origin, rect.normal) / denom;
    if (!(t > 0.0)) return std::nullopt;
    const WorldPosition p = ray.origin + ray.direction * t;
    const double u = dot(p - rect.anchor, rect.right());
    const double v = p.y - rect.anchor.y;
    if (std::abs(u) < rect.width * 0.5 && v > 0.0 && v < rect.height) return t;
    return std::nullopt;
}

std::optional<std::size_t> detect_occluder(const PlacedLabel& label, std::span<const PlacedLabel> placed,
                                           WorldPosition device, bool strict, RayStats* stats)
{
    if (placed.empty()) return std::nullopt;
    std::array<Ray, 5> rays;
    const std::size_t count = ray_set(label.rect, device, strict, rays);
    if (stats) stats->rays_cast += count;
    const std::span<const Ray> cast(rays.data(), count);

    for (std::size_t j = 0; j < placed.size(); ++j) {
        const PlacedLabel& other = placed[j];
        if (!strict && !(other.distance_key < label.distance_key)) continue;
        if (any_ray_hits(cast, other.rect)) return j;
        if (strict && reverse_hit(label.rect, other.rect, device, stats)) return j;
    }
    return std::nullopt;
}

double shift_over(const BillboardRect& label, const BillboardRect& occluder, WorldPosition device, double margin)
{
    const double slack = 1e-9 * std::max(label.width, occluder.width);
    double required = -std::numeric_limits<double>::infinity();
    bool overlap = false;

    // The clearance constraint is tightest at the ends of the shared
    // direction interval, which are edges of one rectangle or the other.
    std::array<Direction, 4> dirs;
    const auto a = edge_directions(label, device);
    const auto b = edge_directions(occluder, device);
    std::copy(a.begin(), a.end(), dirs.begin());
    std::copy(b.begin(), b.end(), dirs.begin() + 2);
    for (const Direction& u : dirs) {
        const auto on_label = horizontal_hit(label, u.x, u.z, device);
        const auto on_occluder = horizontal_hit(occluder, u.x, u.z, device);
        if (!on_label || !on_occluder) continue;
        if (!within_span(*on_label, label, slack) || !within_span(*on_occluder, occluder, slack)) continue;
        overlap = true;
        required = std::max(required, device.y + (occluder.top() - device.y) * on_label->distance / on_occluder->distance);
    }
    if (!overlap) {
        const double ratio = horizontal_distance(label.anchor, device) / horizontal_distance(occluder.anchor, device);
        required = device.y + (occluder.top() - device.y) * ratio;
    }
    return std::max(label.anchor.y, required + margin);
}

OcclusionResult resolve_all(std::vector<PlacedLabel> labels, WorldPosition device, const OcclusionSettings& settings)
{
    OcclusionResult result;
    OcclusionReport& report = result.report;
    const std::size_t n = labels.size();
    report.shifts.assign(n, 0.0);

    RayStats stats;
    std::list<std::size_t> candidates;
    for (std::size_t i = 1; i < n; ++i) {
        PlacedLabel& label = labels[i];
        const double initial_y = label.rect.anchor.y;
        const double margin = settings.margin_fraction * label.rect.height;

        candidates.clear();
        for (std::size_t j = 0; j < i; ++j) {
            if (settings.strict || labels[j].distance_key < label.distance_key) candidates.push_back(j);
        }

        for (;;) {
            std::array<Ray, 5> rays;
            const std::size_t count = ray_set(label.rect, device, settings.strict, rays);
            stats.rays_cast += count;
            const std::span<const Ray> cast(rays.data(), count);

            std::optional<std::size_t> occluder;
            for (auto it = candidates.begin(); it != candidates.end();) {
                const BillboardRect& other = labels[*it].rect;
                bool hit = any_ray_hits(cast, other);
                if (!hit && settings.strict) hit = reverse_hit(label.rect, other, device, &stats);
                if (hit) {
                    occluder = *it;
                    // Once shifted over, the occluder stays below this label.
                    candidates.erase(it);
                    break;
                }
                if (!settings.strict && permanently_clear(label.rect, other, device)) {
                    it = candidates.erase(it);
                } else {
                    ++it;
                }
            }
            if (!occluder) break;

            label.rect.anchor.y = shift_over(label.rect, labels[*occluder].rect, device, margin);
            ++report.shifts_performed;
        }

        report.shifts[i] = label.rect.anchor.y - initial_y;
        if (report.shifts[i] > 0.0) ++report.labels_shifted;
    }

    report.rays_cast = stats.rays_cast;
    result.placed = std::move(labels);
    return result;
}

OcclusionResult resolve_all(const SortedLabels& order, std::span<const BillboardRect> rects, WorldPosition device,
                            const OcclusionSettings& settings)
{
    if (rects.size() != order.entries.size()) throw LabelError("resolve_all: rects must align with the sorted order");
    std::vector<PlacedLabel> labels;
    labels.reserve(rects.size());
    for (std::size_t k = 0; k < rects.size(); ++k) labels.push_back({rects[k], order.entries[k].distance_key});
    return resolve_all(std::move(labels), device, settings);
}

} // namespace labelkit
