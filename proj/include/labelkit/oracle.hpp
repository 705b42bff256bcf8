#pragma once

#include "labelkit/occlusion.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace labelkit {

// Brute-force occlusion checker. It shares no code with the resolver beyond
// the rectangle type: every sample ray and plane hit is computed here.

struct OracleLabel {
    std::string id;
    BillboardRect rect;
    long long distance_key = 0;
};

struct OracleOverlap {
    std::string front;
    std::string back;
};

struct OracleVerdict {
    bool occlusion_free = true;
    std::vector<OracleOverlap> overlaps;
    std::size_t samples = 0;
};

inline constexpr int kOracleGrid = 33;

// Whether two rectangles overlap with positive area as seen from `device`.
// Samples a lattice over each rectangle plus the columns and rows where the
// other rectangle's edges project, so thin slivers are not missed.
bool oracle_pair_overlaps(const BillboardRect& a, const BillboardRect& b, WorldPosition device, int grid = kOracleGrid,
                          std::size_t* samples = nullptr);

OracleVerdict oracle_verdict(std::span<const OracleLabel> labels, WorldPosition device, int grid = kOracleGrid);

inline constexpr std::size_t kOracleReferenceLimit = 12;

struct ReferenceEntry {
    std::string id;
    double greedy_y = 0.0;
    // Lowest bottom height that overlaps none of the strictly closer labels
    // (as the greedy result placed them) and keeps `margin` clearance above
    // each one it has to pass.
    double reference_y = 0.0;
    // Lowest bottom height free of overlap, margin ignored.
    double lowest_free_y = 0.0;
    bool free = true;
    bool minimal = true;
};

struct ReferenceReport {
    std::vector<ReferenceEntry> entries;
    bool ok = true;
};

// Checks a resolved layout label by label: each greedy height must be free of
// overlap with closer labels and no higher than the reference height.
// `labels` are in resolve order with their final rectangles and
// `initial_y[i]` is where label i started. Throws LabelError above
// kOracleReferenceLimit labels.
ReferenceReport oracle_reference(std::span<const OracleLabel> labels, std::span<const double> initial_y, WorldPosition device,
                                 double margin_fraction);

} // namespace labelkit
