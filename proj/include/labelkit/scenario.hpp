#pragma once

#include "labelkit/geo.hpp"
#include "labelkit/occlusion.hpp"
#include "labelkit/scene.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labelkit {

enum class LayoutKind { Circle, Grid, Line };

std::string_view layout_name(LayoutKind kind);
std::optional<LayoutKind> layout_from_name(std::string_view name);

inline constexpr double kCircleRadius = 1000.0;
inline constexpr double kGridExtent = 4000.0;
inline constexpr double kLineSpacing = 90.0;
inline constexpr double kLineStart = 90.0;
// Distance from the device to the near edge of the grid.
inline constexpr double kGridSetback = 100.0;

struct LayoutSpec {
    LayoutKind kind = LayoutKind::Circle;
    std::size_t n = 1;
    // Radius, extent or spacing depending on kind; 0 selects the default.
    double parameter = 0.0;
    Extent extent{120.0, 120.0};
};

// Every synthetic layout is seen from the world origin, looking down -z.
DevicePose layout_pose();

Scene gen_circle(std::size_t n, double radius = kCircleRadius, Extent extent = {120.0, 120.0});
Scene gen_grid(std::size_t n, double extent = kGridExtent, Extent label = {120.0, 120.0});
Scene gen_line(std::size_t n, double spacing = kLineSpacing, double start = kLineStart, Extent extent = {120.0, 120.0});
Scene generate(const LayoutSpec& spec);

// Sorted rectangles for a scene whose labels all use the Highest extent,
// ready for resolve_all.
struct LayoutLabels {
    SortedLabels order;
    std::vector<BillboardRect> rects;
};
LayoutLabels layout_labels(const Scene& scene, WorldPosition device);

struct BenchRecord {
    LayoutKind kind = LayoutKind::Circle;
    std::size_t n = 0;
    double median_ms = 0.0;
    std::size_t rays = 0;
    std::size_t shifts = 0;
};

struct BenchOptions {
    std::vector<LayoutKind> layouts{LayoutKind::Circle, LayoutKind::Grid, LayoutKind::Line};
    std::vector<std::size_t> ns{10, 20, 30, 40, 50, 75, 100};
    int repetitions = 5;
    // Lower bound on the duration of one timed sample; short runs are
    // repeated inside the sample and averaged.
    double min_sample_ms = 2.0;
};

// Times sort plus occlusion resolution for each (layout, n). One untimed
// warm-up run precedes the timed repetitions. Throws LabelError when fewer
// than three repetitions are requested.
std::vector<BenchRecord> run_bench(const BenchOptions& options);

std::string bench_csv(const std::vector<BenchRecord>& records);
std::string bench_table(const std::vector<BenchRecord>& records);

// Least-squares slope of log(time) against log(n).
double fit_exponent(const std::vector<double>& ns, const std::vector<double>& times);

// Directory holding the bundled scenes. LABELKIT_DATA_DIR in the environment
// overrides the build-time location.
std::filesystem::path data_dir();

// "local-shops" or "theme-park". Throws LabelError for any other name.
Scene load_example(std::string_view name);

} // namespace labelkit
