#include "labelkit/scenario.hpp"

#include "labelkit/scene_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#ifndef LABELKIT_DATA_DIR
#define LABELKIT_DATA_DIR "data"
#endif

namespace labelkit {

namespace {

std::string padded_id(const char* prefix, std::size_t k, std::size_t n)
{
    const int width = std::max<int>(3, static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, k);
    return buf;
}

Scene layout_scene(Extent extent)
{
    Scene s;
    s.label_extents = LodExtents::uniform(extent);
    s.color_scale = ColorScale::white_to_red(0.0, 1.0);
    return s;
}

Poi layout_poi(std::string id, WorldPosition at)
{
    Poi p;
    p.name = id;
    p.id = std::move(id);
    p.position = at;
    return p;
}

void require_positive(std::size_t n, double parameter)
{
    if (n == 0) throw LabelError("layout needs at least one label");
    if (!(parameter > 0.0) || !std::isfinite(parameter)) throw LabelError("layout parameter must be positive");
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

std::string_view layout_name(LayoutKind kind)
{
    switch (kind) {
    case LayoutKind::Circle: return "circle";
    case LayoutKind::Grid: return "grid";
    case LayoutKind::Line: return "line";
    }
    return "circle";
}

std::optional<LayoutKind> layout_from_name(std::string_view name)
{
    for (LayoutKind k : {LayoutKind::Circle, LayoutKind::Grid, LayoutKind::Line})
        if (layout_name(k) == name) return k;
    return std::nullopt;
}

DevicePose layout_pose()
{
    DevicePose pose;
    pose.position = {0.0, 0.0, 0.0};
    return pose;
}

Scene gen_circle(std::size_t n, double radius, Extent extent)
{
    require_positive(n, radius);
    Scene s = layout_scene(extent);
    for (std::size_t k = 0; k < n; ++k) {
        const double az = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        s.pois.push_back(layout_poi(padded_id("c", k, n), {radius * std::sin(az), 0.0, -radius * std::cos(az)}));
    }
    return s;
}

Scene gen_grid(std::size_t n, double extent, Extent label)
{
    require_positive(n, extent);
    Scene s = layout_scene(label);
    const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double cell = extent / static_cast<double>(cols);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t row = k / cols, col = k % cols;
        const double x = -extent / 2.0 + (static_cast<double>(col) + 0.5) * cell;
        const double z = -kGridSetback - (static_cast<double>(row) + 0.5) * cell;
        s.pois.push_back(layout_poi(padded_id("g", k, n), {x, 0.0, z}));
    }
    return s;
}

Scene gen_line(std::size_t n, double spacing, double start, Extent extent)
{
    require_positive(n, spacing);
    if (!(start > 0.0)) throw LabelError("line layout must start in front of the device");
    Scene s = layout_scene(extent);
    for (std::size_t k = 0; k < n; ++k)
        s.pois.push_back(layout_poi(padded_id("l", k, n), {0.0, 0.0, -(start + spacing * static_cast<double>(k))}));
    return s;
}

Scene generate(const LayoutSpec& spec)
{
    switch (spec.kind) {
    case LayoutKind::Circle: return gen_circle(spec.n, spec.parameter > 0 ? spec.parameter : kCircleRadius, spec.extent);
    case LayoutKind::Grid: return gen_grid(spec.n, spec.parameter > 0 ? spec.parameter : kGridExtent, spec.extent);
    case LayoutKind::Line: return gen_line(spec.n, spec.parameter > 0 ? spec.parameter : kLineSpacing, kLineStart, spec.extent);
    }
    throw LabelError("unknown layout");
}

LayoutLabels layout_labels(const Scene& scene, WorldPosition device)
{
    LayoutLabels out;
    DevicePose pose;
    pose.position = device;
    out.order = sort_by_distance(scene, pose);
    out.rects.reserve(out.order.entries.size());
    for (const SortedEntry& e : out.order.entries)
        out.rects.push_back(make_billboard(scene.find_poi(e.id)->position, scene.label_extents.highest, device));
    return out;
}

std::vector<BenchRecord> run_bench(const BenchOptions& options)
{
    if (options.repetitions < 3) throw LabelError("benchmark needs at least three repetitions");
    using Clock = std::chrono::steady_clock;
    const WorldPosition device = layout_pose().position;

    std::vector<BenchRecord> records;
    for (LayoutKind kind : options.layouts) {
        for (std::size_t n : options.ns) {
            const Scene scene = generate({kind, n});
            BenchRecord rec{kind, n};
            auto once = [&] {
                const LayoutLabels labels = layout_labels(scene, device);
                return resolve_all(labels.order, labels.rects, device, scene.occlusion).report;
            };

            // Warm-up, also used to size the inner loop.
            const auto w0 = Clock::now();
            const OcclusionReport report = once();
            const double warm_ms = std::chrono::duration<double, std::milli>(Clock::now() - w0).count();
            rec.rays = report.rays_cast;
            rec.shifts = report.shifts_performed;
            const int inner = std::clamp(static_cast<int>(std::ceil(options.min_sample_ms / std::max(warm_ms, 1e-4))), 1, 100000);

            std::vector<double> samples;
            for (int r = 0; r < options.repetitions; ++r) {
                const auto t0 = Clock::now();
                for (int k = 0; k < inner; ++k) {
                    const OcclusionReport again = once();
                    if (again.rays_cast != rec.rays || again.shifts_performed != rec.shifts)
                        throw LabelError("benchmark counts changed between runs");
                }
                samples.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / inner);
            }
            rec.median_ms = median(samples);
            records.push_back(rec);
        }
    }
    return records;
}

std::string bench_csv(const std::vector<BenchRecord>& records)
{
    std::ostringstream out;
    out << "layout,n,median_ms,rays,shifts\n";
    for (const BenchRecord& r : records) {
        char ms[64];
        std::snprintf(ms, sizeof ms, "%.6f", r.median_ms);
        out << layout_name(r.kind) << ',' << r.n << ',' << ms << ',' << r.rays << ',' << r.shifts << '\n';
    }
    return out.str();
}

std::string bench_table(const std::vector<BenchRecord>& records)
{
    std::ostringstream out;
    out << "# occlusion resolution, median wall time per frame on this machine\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %6s %12s %10s %10s\n", "layout", "n", "median_ms", "rays", "shifts");
    out << line;
    for (const BenchRecord& r : records) {
        std::snprintf(line, sizeof line, "%-8s %6zu %12.4f %10zu %10zu\n", std::string(layout_name(r.kind)).c_str(), r.n,
                      r.median_ms, r.rays, r.shifts);
        out << line;
    }
    return out.str();
}

double fit_exponent(const std::vector<double>& ns, const std::vector<double>& times)
{
    if (ns.size() != times.size() || ns.size() < 2) throw LabelError("fit_exponent needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(ns.size());
    for (std::size_t k = 0; k < ns.size(); ++k) {
        if (!(ns[k] > 0.0) || !(times[k] > 0.0)) throw LabelError("fit_exponent needs positive values");
        const double x = std::log(ns[k]), y = std::log(times[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::filesystem::path data_dir()
{
    if (const char* env = std::getenv("LABELKIT_DATA_DIR"); env && *env) return env;
    return LABELKIT_DATA_DIR;
}

Scene load_example(std::string_view name)
{
    if (name != "local-shops" && name != "theme-park") throw LabelError("unknown example '" + std::string(name) + "'");
    return load_scene(data_dir() / (std::string(name) + ".json"));
}

} // namespace labelkit
