#include "labelkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace labelkit {

namespace {

constexpr double kInward = 1e-7;
constexpr double kNudge = 1e-6;

struct Frame {
    double ax, ay, az;  // anchor
    double nx, nz;      // normal
    double rx, rz;      // right
    double half_w, h;
};

Frame frame_of(const BillboardRect& r)
{
    const double len = std::hypot(r.normal.x, r.normal.z);
    const double nx = r.normal.x / len, nz = r.normal.z / len;
    return {r.anchor.x, r.anchor.y, r.anchor.z, nx, nz, nz, -nx, r.width * 0.5, r.height};
}

// Parameter along the ray D + s * dir where it meets the frame's plane.
std::optional<double> plane_param(const Frame& f, WorldPosition d, double dx, double dz)
{
    const double denom = dx * f.nx + dz * f.nz;
    if (std::abs(denom) < 1e-15) return std::nullopt;
    const double s = ((f.ax - d.x) * f.nx + (f.az - d.z) * f.nz) / denom;
    if (!(s > 0.0)) return std::nullopt;
    return s;
}

// Ray parameter at which the segment device->p passes strictly through the
// interior of f (p itself sits at parameter 1).
std::optional<double> interior_hit(const Frame& f, WorldPosition d, WorldPosition p)
{
    const double dx = p.x - d.x, dy = p.y - d.y, dz = p.z - d.z;
    const auto s = plane_param(f, d, dx, dz);
    if (!s) return std::nullopt;
    const double hx = d.x + dx * *s, hy = d.y + dy * *s, hz = d.z + dz * *s;
    const double u = (hx - f.ax) * f.rx + (hz - f.az) * f.rz;
    const double v = hy - f.ay;
    if (std::abs(u) < f.half_w * (1.0 - kInward) && v > f.h * kInward && v < f.h * (1.0 - kInward)) return s;
    return std::nullopt;
}

WorldPosition point_on(const Frame& f, double u, double v) { return {f.ax + f.rx * u, f.ay + v, f.az + f.rz * u}; }

// Lateral offset on `a` hit by the horizontal direction from the device
// through lateral offset `u` of `b`.
std::optional<double> lateral_on(const Frame& a, const Frame& b, double u, WorldPosition d)
{
    const WorldPosition p = point_on(b, u, 0.0);
    const auto s = plane_param(a, d, p.x - d.x, p.z - d.z);
    if (!s) return std::nullopt;
    return (d.x + (p.x - d.x) * *s - a.ax) * a.rx + (d.z + (p.z - d.z) * *s - a.az) * a.rz;
}

// Samples `a` and looks for a point strictly inside `b`. Returns whether `a`
// lies behind `b` at the first such point.
std::optional<bool> sample_against(const Frame& a, const Frame& b, WorldPosition d, int grid, std::size_t& samples)
{
    std::vector<double> cols;
    cols.reserve(grid + 4);
    for (int k = 0; k < grid; ++k) cols.push_back(-a.half_w + 2.0 * a.half_w * k / (grid - 1));
    for (double edge : {-b.half_w, b.half_w}) {
        if (const auto u = lateral_on(a, b, edge, d)) {
            for (double off : {-kNudge, kNudge}) {
                const double c = *u + off * a.half_w * 2.0;
                if (std::abs(c) <= a.half_w) cols.push_back(c);
            }
        }
    }

    std::vector<double> rows;
    for (double u : cols) {
        rows.clear();
        for (int k = 0; k < grid; ++k) rows.push_back(a.h * k / (grid - 1));
        // Heights at which b's top and bottom edges project onto this column.
        const WorldPosition base = point_on(a, u, 0.0);
        const double hx = base.x - d.x, hz = base.z - d.z;
        const double dist_a = std::hypot(hx, hz);
        if (const auto s = plane_param(b, d, hx, hz); s && dist_a > 0.0) {
            const double bu = (d.x + hx * *s - b.ax) * b.rx + (d.z + hz * *s - b.az) * b.rz;
            if (std::abs(bu) < b.half_w) {
                const double ratio = 1.0 / *s; // dist_a / dist_b
                for (double edge : {b.ay, b.ay + b.h}) {
                    const double v = d.y + (edge - d.y) * ratio - a.ay;
                    for (double off : {-kNudge, kNudge}) {
                        const double r = v + off * a.h;
                        if (r >= 0.0 && r <= a.h) rows.push_back(r);
                    }
                }
            }
        }
        for (double v : rows) {
            ++samples;
            const WorldPosition p = point_on(a, u, v);
            if (const auto s = interior_hit(b, d, p)) return *s < 1.0;
        }
    }
    return std::nullopt;
}

// Whether a and b overlap; when they do, whether a is the one in front.
std::optional<bool> pair_check(const BillboardRect& ra, const BillboardRect& rb, WorldPosition d, int grid, std::size_t& samples)
{
    const Frame a = frame_of(ra), b = frame_of(rb);
    if (const auto behind = sample_against(a, b, d, grid, samples)) return !*behind;
    if (const auto behind = sample_against(b, a, d, grid, samples)) return *behind;
    return std::nullopt;
}

} // namespace

bool oracle_pair_overlaps(const BillboardRect& a, const BillboardRect& b, WorldPosition device, int grid, std::size_t* samples)
{
    std::size_t count = 0;
    const bool hit = pair_check(a, b, device, grid, count).has_value();
    if (samples) *samples += count;
    return hit;
}

OracleVerdict oracle_verdict(std::span<const OracleLabel> labels, WorldPosition device, int grid)
{
    OracleVerdict v;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        for (std::size_t j = i + 1; j < labels.size(); ++j) {
            const auto a_front = pair_check(labels[i].rect, labels[j].rect, device, grid, v.samples);
            if (!a_front) continue;
            v.occlusion_free = false;
            if (*a_front) v.overlaps.push_back({labels[i].id, labels[j].id});
            else v.overlaps.push_back({labels[j].id, labels[i].id});
        }
    }
    return v;
}

namespace {

struct Interval {
    double lo;
    double hi;
};

// Heights y >= from at which `label` (bottom at y) overlaps `other`, as one
// interval; only intervals starting at or below `until` are searched.
std::optional<Interval> overlap_interval(BillboardRect label, const BillboardRect& other, WorldPosition d, double from,
                                         double until)
{
    std::size_t samples = 0;
    auto overlaps_at = [&](double y) {
        label.anchor.y = y;
        return pair_check(label, other, d, kOracleGrid, samples).has_value();
    };
    const double step = label.height / 64.0;
    const double precision = label.height * 1e-10;
    auto bisect = [&](double inside, double outside) {
        while (std::abs(outside - inside) > precision) {
            const double mid = 0.5 * (inside + outside);
            (overlaps_at(mid) ? inside : outside) = mid;
        }
        return outside;
    };

    double lo = -std::numeric_limits<double>::infinity();
    double y = from;
    if (!overlaps_at(y)) {
        bool found = false;
        while (y < until) {
            const double next = std::min(y + step, until);
            if (overlaps_at(next)) {
                lo = bisect(next, y);
                y = next;
                found = true;
                break;
            }
            y = next;
        }
        if (!found) return std::nullopt;
    }
    // Walk up until the label clears `other`.
    double up = step;
    double inside = y;
    double outside = y + up;
    while (overlaps_at(outside)) {
        inside = outside;
        up *= 2.0;
        outside = inside + up;
        if (up > 1e9) throw LabelError("oracle: overlap interval does not close");
    }
    return Interval{lo, bisect(inside, outside)};
}

double lowest_free(double start, const std::vector<Interval>& blocked, double margin, double tol)
{
    double y = start;
    for (bool moved = true; moved;) {
        moved = false;
        for (const Interval& b : blocked) {
            if (y > b.lo + tol && y < b.hi + margin - tol) {
                y = b.hi + margin;
                moved = true;
            }
        }
    }
    return y;
}

} // namespace

ReferenceReport oracle_reference(std::span<const OracleLabel> labels, std::span<const double> initial_y, WorldPosition device,
                                 double margin_fraction)
{
    if (labels.size() > kOracleReferenceLimit) throw LabelError("oracle reference mode supports at most 12 labels");
    if (initial_y.size() != labels.size()) throw LabelError("oracle reference: initial heights misaligned");

    ReferenceReport report;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const OracleLabel& label = labels[i];
        const double margin = margin_fraction * label.rect.height;
        // The sampled interior test stops short of the boundary by a relative
        // 1e-7, which the projection can magnify; accept 1e-6 of the travel.
        const double tol = 1e-6 * (label.rect.height + std::abs(label.rect.anchor.y - initial_y[i])) + 1e-9;
        ReferenceEntry entry;
        entry.id = label.id;
        entry.greedy_y = label.rect.anchor.y;

        std::vector<Interval> blocked;
        for (std::size_t j = 0; j < labels.size(); ++j) {
            if (!(labels[j].distance_key < label.distance_key)) continue;
            std::size_t samples = 0;
            if (pair_check(label.rect, labels[j].rect, device, kOracleGrid, samples)) entry.free = false;
            if (auto iv = overlap_interval(label.rect, labels[j].rect, device, initial_y[i], entry.greedy_y + tol))
                blocked.push_back(*iv);
        }
        entry.reference_y = lowest_free(initial_y[i], blocked, margin, tol);
        entry.lowest_free_y = lowest_free(initial_y[i], blocked, 0.0, tol);
        entry.minimal = entry.greedy_y <= entry.reference_y + tol;
        report.ok = report.ok && entry.free && entry.minimal;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace labelkit
