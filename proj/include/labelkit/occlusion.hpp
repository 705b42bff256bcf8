#pragma once

#include "labelkit/geo.hpp"
#include "labelkit/scene.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace labelkit {

// A vertical rectangle standing on `anchor` (bottom-center) and facing the
// device horizontally.
struct BillboardRect {
    WorldPosition anchor;
    double width = 0.0;
    double height = 0.0;
    // Horizontal unit normal pointing toward the device.
    WorldPosition normal{0.0, 0.0, 1.0};

    double top() const { return anchor.y + height; }
    // Right-hand direction as seen by the viewer.
    WorldPosition right() const { return {normal.z, 0.0, -normal.x}; }
};

BillboardRect make_billboard(WorldPosition anchor, Extent extent, WorldPosition device);

struct Ray {
    WorldPosition origin;
    WorldPosition direction;
};

enum Corner : std::size_t { BottomLeft = 0, BottomRight = 1, TopLeft = 2, TopRight = 3 };

std::array<WorldPosition, 4> rect_corners(const BillboardRect& rect);

// Rays from the device through the four corners, in Corner order. Throws
// LabelError when the device lies on the rectangle's plane.
std::array<Ray, 4> corner_rays(const BillboardRect& rect, WorldPosition device);

// Distance along the ray to the rectangle's interior, if it is hit at a
// positive parameter. Points on the boundary do not count.
std::optional<double> ray_hits_rect(const Ray& ray, const BillboardRect& rect);

// One label as the resolver sees it: its rectangle plus the quantized
// horizontal distance that defines "closer".
struct PlacedLabel {
    BillboardRect rect;
    long long distance_key = 0;
};

struct RayStats {
    std::size_t rays_cast = 0;
};

// Index (into `placed`) of the first label, in sorted order, hit by one of
// `label`'s corner rays. Only labels strictly closer than `label` are tested
// unless `strict` is set, which also tests equal-distance labels, adds a
// center ray and casts the candidates' own corner rays back at `label`.
std::optional<std::size_t> detect_occluder(const PlacedLabel& label, std::span<const PlacedLabel> placed,
                                           WorldPosition device, bool strict = false, RayStats* stats = nullptr);

// New bottom height for `label` so that it clears `occluder`'s top edge,
// seen from the device, over every direction in which both rectangles
// overlap. `margin` is added on top and the result never drops below the
// current height.
double shift_over(const BillboardRect& label, const BillboardRect& occluder, WorldPosition device, double margin);

struct OcclusionReport {
    // Final vertical shift per label, aligned with the sorted order.
    std::vector<double> shifts;
    std::size_t rays_cast = 0;
    std::size_t shifts_performed = 0;
    std::size_t labels_shifted = 0;
};

struct OcclusionResult {
    OcclusionReport report;
    // Final rectangles, aligned with the sorted order.
    std::vector<PlacedLabel> placed;
};

// Greedy resolution from the nearest label outward. `labels` must already be
// in sorted (nearest first) order.
OcclusionResult resolve_all(std::vector<PlacedLabel> labels, WorldPosition device, const OcclusionSettings& settings = {});

// Convenience overload: rectangles aligned with `order.entries`.
OcclusionResult resolve_all(const SortedLabels& order, std::span<const BillboardRect> rects, WorldPosition device,
                            const OcclusionSettings& settings = {});

} // namespace labelkit
