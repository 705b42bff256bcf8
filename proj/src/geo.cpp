#include "labelkit/geo.hpp"

#include <algorithm>
#include <cmath>

namespace labelkit {

double normalize_yaw(double deg)
{
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    if (r >= 360.0) r = 0.0;
    return r;
}

bool DevicePose::finite() const
{
    if (!position.finite() || !std::isfinite(yaw_deg) || !std::isfinite(pitch_deg)) return false;
    if (geo && !geo->valid()) return false;
    if (compass_deg && !std::isfinite(*compass_deg)) return false;
    return true;
}

WorldPosition geodetic_to_local(const GeoOrigin& origin, const GeoCoordinate& target)
{
    if (!origin.coordinate.valid() || !target.valid() || !std::isfinite(origin.compass_deg))
        throw LabelError("geodetic_to_local: non-finite or out-of-range coordinate");
    if (std::abs(origin.coordinate.latitude_deg) >= 89.0 || std::abs(target.latitude_deg) >= 89.0)
        throw LabelError("geodetic_to_local: latitude too close to a pole for a local projection");

    double dlon = target.longitude_deg - origin.coordinate.longitude_deg;
    if (dlon > 180.0) dlon -= 360.0;
    if (dlon < -180.0) dlon += 360.0;
    const double lat0 = deg_to_rad(origin.coordinate.latitude_deg);
    const double east = kEarthRadiusM * std::cos(lat0) * deg_to_rad(dlon);
    const double north = kEarthRadiusM * deg_to_rad(target.latitude_deg - origin.coordinate.latitude_deg);

    // Unrotated frame: east = +x, north = -z. Rotating by the compass heading
    // brings the device's initial heading onto -z.
    const double c = deg_to_rad(origin.compass_deg);
    const double cs = std::cos(c);
    const double sn = std::sin(c);
    return {east * cs - north * sn, 0.0, -(north * cs + east * sn)};
}

double haversine_distance_m(const GeoCoordinate& a, const GeoCoordinate& b)
{
    const double p1 = deg_to_rad(a.latitude_deg);
    const double p2 = deg_to_rad(b.latitude_deg);
    const double dp = p2 - p1;
    const double dl = deg_to_rad(b.longitude_deg - a.longitude_deg);
    const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

WorldPosition orient_billboard(WorldPosition anchor, WorldPosition device, WorldPosition previous)
{
    const double dx = device.x - anchor.x;
    const double dz = device.z - anchor.z;
    const double len = std::hypot(dx, dz);
    if (!(len > 0.0)) return previous;
    return {dx / len, 0.0, dz / len};
}

long long distance_key(double distance) { return std::llround(distance / kDistanceQuantum); }

SortedLabels sort_by_distance(const std::vector<Anchor>& anchors, WorldPosition device)
{
    SortedLabels out;
    out.entries.reserve(anchors.size());
    for (const Anchor& a : anchors) {
        const double d = horizontal_distance(a.position, device);
        out.entries.push_back({a.id, d, distance_key(d)});
    }
    std::sort(out.entries.begin(), out.entries.end(), [](const SortedEntry& a, const SortedEntry& b) {
        if (a.distance_key != b.distance_key) return a.distance_key < b.distance_key;
        return a.id < b.id;
    });
    return out;
}

SortedLabels sort_by_distance(const Scene& scene, const DevicePose& device)
{
    std::vector<Anchor> anchors;
    anchors.reserve(scene.pois.size());
    for (const Poi& p : scene.pois) anchors.push_back({p.id, p.position});
    return sort_by_distance(anchors, device.position);
}

} // namespace labelkit
