#pragma once

#include "labelkit/geo.hpp"
#include "labelkit/scene.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace labelkit {

// Azimuth covered by a label of `width` seen from `horizontal_dist`, in
// degrees. Throws LabelError for a non-positive distance.
double angular_width(double width, double horizontal_dist);

struct LodCandidate {
    std::string id;
    WorldPosition position;
    LodExtents extents;
};

struct LodAssignment {
    std::map<std::string, LodLevel> levels;
    // Azimuth consumed by closer labels in each label's own view volume.
    std::map<std::string, double> crowding;
};

// Walks the labels nearest first. Each label looks down its own horizontal
// direction; labels within t_deg of that direction form its view volume and
// the widths of the ones already walked add up to its crowding. Crowding
// below m1 keeps the Highest level, below m2 Middle, otherwise Lowest.
// Widths are taken at the level already assigned in the same walk, which is
// well defined because a label only looks at closer labels. Labels standing
// exactly at the device keep Highest and crowd nobody.
LodAssignment assign_lods(const SortedLabels& order, std::span<const LodCandidate> candidates,
                          const LodThresholds& thresholds, WorldPosition device);

struct LegendEntry {
    std::string poi_id;
    std::string name;
    double value = 0.0;
    Rgb color;
};

struct SuperLabel {
    std::string group_id;
    std::string name;
    WorldPosition position;
    double aggregate_value = 0.0;
    std::string unit;
    Rgb color;
    std::vector<LegendEntry> legend;
};

struct AggregationResult {
    std::vector<SuperLabel> super_labels;
    std::set<std::string> hidden_poi_ids;
    std::map<std::string, bool> aggregated;
    std::optional<std::string> closest_group;
};

// Mean (x, z) of the members, y = 0.
WorldPosition group_centroid(const Scene& scene, const LabelGroup& group);

// A group collapses into a super label when it is not the group closest to
// the device and the device is outside its region (member bounding box grown
// by scene.group_margin). With `previous` flags, the margin is widened by
// 10% for groups that are currently split and narrowed by 10% for groups that
// are currently aggregated, so a device on the boundary does not toggle.
AggregationResult aggregate_groups(const Scene& scene, WorldPosition device,
                                   const std::map<std::string, bool>* previous = nullptr);

SuperLabel make_super_label(const Scene& scene, const LabelGroup& group);

} // namespace labelkit
