#pragma once

#include "labelkit/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace labelkit {

inline constexpr double kEarthRadiusM = 6'371'000.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps any finite angle into [0, 360).
double normalize_yaw(double deg);

struct DevicePose {
    WorldPosition position;
    // Heading about the vertical axis; 0 looks along -z, 90 along +x.
    double yaw_deg = 0.0;
    // Tilt, positive up.
    double pitch_deg = 0.0;
    std::optional<GeoCoordinate> geo;
    std::optional<double> compass_deg;

    bool finite() const;
    friend bool operator==(const DevicePose&, const DevicePose&) = default;
};

// Equirectangular projection around `origin`, rotated so that the compass
// heading at the origin becomes -z. Returns y = 0.
WorldPosition geodetic_to_local(const GeoOrigin& origin, const GeoCoordinate& target);

// Great-circle distance, used only to check the local projection.
double haversine_distance_m(const GeoCoordinate& a, const GeoCoordinate& b);

// Horizontal unit normal of a billboard facing the device. Rotation is about
// the vertical axis only, so device pitch never matters. Returns `previous`
// when the anchor is directly above or below the device.
WorldPosition orient_billboard(WorldPosition anchor, WorldPosition device, WorldPosition previous = {0.0, 0.0, 1.0});

struct SortedEntry {
    std::string id;
    double distance = 0.0;
    // Quantized distance; equal keys are ties and fall back to id order.
    long long distance_key = 0;
};

// Ordered nearest first. Distances within kDistanceQuantum of each other tie.
struct SortedLabels {
    std::vector<SortedEntry> entries;
};

inline constexpr double kDistanceQuantum = 1e-6;

long long distance_key(double distance);

struct Anchor {
    std::string id;
    WorldPosition position;
};

SortedLabels sort_by_distance(const std::vector<Anchor>& anchors, WorldPosition device);
SortedLabels sort_by_distance(const Scene& scene, const DevicePose& device);

} // namespace labelkit
