#include "labelkit/coherence.hpp"
#include "labelkit/lod.hpp"
#include "labelkit/oracle.hpp"
#include "labelkit/pipeline.hpp"
#include "labelkit/scenario.hpp"
#include "labelkit/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace labelkit;

namespace {

// Tolerances.
constexpr double kOracleBudgetS = 60.0;
constexpr double kBenchBudgetS = 120.0;
constexpr double kExponentLow = 1.7;
constexpr double kExponentHigh = 2.3;
constexpr double kShiftTol = 1e-9;
constexpr double kReferenceTol = 1e-6;
constexpr double kEasingTol = 1e-6;
constexpr double kMeanTol = 1e-9;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
    bool pass = true;
    std::string detail;
};

void fail(Outcome& o, const std::string& why)
{
    if (o.pass) o.detail = why;
    o.pass = false;
}

DevicePose make_pose(WorldPosition p, double yaw = 0, double pitch = 0)
{
    DevicePose d;
    d.position = p;
    d.yaw_deg = yaw;
    d.pitch_deg = pitch;
    return d;
}

std::vector<OracleLabel> resolved(const Scene& scene, WorldPosition device, std::vector<double>* initial = nullptr,
                                  const OcclusionSettings& settings = {})
{
    const LayoutLabels labels = layout_labels(scene, device);
    const OcclusionResult r = resolve_all(labels.order, labels.rects, device, settings);
    std::vector<OracleLabel> out;
    for (std::size_t k = 0; k < r.placed.size(); ++k) {
        out.push_back({labels.order.entries[k].id, r.placed[k].rect, r.placed[k].distance_key});
        if (initial) initial->push_back(labels.rects[k].anchor.y);
    }
    return out;
}

Scene random_scene(std::mt19937& rng, std::size_t n)
{
    std::uniform_real_distribution<double> x(-60, 60), z(-120, -5), w(2, 12), h(2, 10);
    Scene s;
    s.label_extents = LodExtents::uniform({w(rng), h(rng)});
    for (std::size_t k = 0; k < n; ++k) s.pois.push_back({"r" + std::to_string(k), "", {x(rng), 0, z(rng)}, {}, "", "", {}, {}});
    return s;
}

Outcome occlusion_freedom()
{
    Outcome o;
    const auto start = Clock::now();
    std::mt19937 rng(20240601);
    std::uniform_int_distribution<std::size_t> count(1, 10);
    std::uniform_real_distribution<double> eye(0.0, 3.0);
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        const Scene s = random_scene(rng, count(rng));
        const WorldPosition d{0, eye(rng), 0};
        if (!oracle_verdict(resolved(s, d), d).occlusion_free) fail(o, "random scene " + std::to_string(k));
        ++checked;
    }
    for (LayoutKind kind : {LayoutKind::Circle, LayoutKind::Grid, LayoutKind::Line}) {
        for (std::size_t n : {2, 10, 20, 30, 40, 50}) {
            const WorldPosition d = layout_pose().position;
            if (!oracle_verdict(resolved(generate({kind, n}), d), d).occlusion_free)
                fail(o, std::string(layout_name(kind)) + " n=" + std::to_string(n));
            ++checked;
        }
    }
    const double elapsed = seconds_since(start);
    if (elapsed >= kOracleBudgetS) fail(o, "took " + std::to_string(elapsed) + " s");
    if (o.pass) o.detail = std::to_string(checked) + " scenes free of overlap in " + std::to_string(elapsed) + " s";
    return o;
}

std::vector<BenchRecord> g_bench;
double g_bench_s = 0.0;

const std::vector<BenchRecord>& bench()
{
    if (g_bench.empty()) {
        const auto start = Clock::now();
        BenchOptions options;
        options.ns = {10, 20, 30, 40, 50, 75, 100};
        options.repetitions = 7;
        options.min_sample_ms = 20.0;
        g_bench = run_bench(options);
        g_bench_s = seconds_since(start);
    }
    return g_bench;
}

const BenchRecord& record(LayoutKind kind, std::size_t n)
{
    for (const BenchRecord& r : bench())
        if (r.kind == kind && r.n == n) return r;
    throw LabelError("missing bench record");
}

Outcome worst_case_complexity()
{
    Outcome o;
    for (std::size_t n : {3, 10, 50}) {
        const Scene s = gen_line(n);
        const LayoutLabels l = layout_labels(s, layout_pose().position);
        const auto r = resolve_all(l.order, l.rects, layout_pose().position);
        if (r.report.shifts_performed != n * (n - 1) / 2)
            fail(o, "n=" + std::to_string(n) + " shifts " + std::to_string(r.report.shifts_performed));
    }
    std::vector<double> ns, times;
    for (std::size_t n : {10, 20, 30, 40, 50, 75, 100}) {
        ns.push_back(static_cast<double>(n));
        times.push_back(record(LayoutKind::Line, n).median_ms);
    }
    const double k = fit_exponent(ns, times);
    if (!(k >= kExponentLow && k <= kExponentHigh)) fail(o, "exponent " + std::to_string(k));
    if (g_bench_s >= kBenchBudgetS) fail(o, "bench took " + std::to_string(g_bench_s) + " s");
    if (o.pass) o.detail = "shifts n(n-1)/2, exponent " + std::to_string(k) + ", bench " + std::to_string(g_bench_s) + " s";
    return o;
}

Outcome layout_ordering()
{
    Outcome o;
    std::ostringstream detail;
    for (std::size_t n : {30, 50, 75, 100}) {
        const double c = record(LayoutKind::Circle, n).median_ms;
        const double g = record(LayoutKind::Grid, n).median_ms;
        const double l = record(LayoutKind::Line, n).median_ms;
        detail << " n=" << n << ":" << c << "/" << g << "/" << l;
        if (!(c <= g && g <= l)) fail(o, "ordering at n=" + std::to_string(n));
        if (record(LayoutKind::Circle, n).rays != 4 * (n - 1)) fail(o, "circle rays at n=" + std::to_string(n));
    }
    if (o.pass) o.detail = "circle<=grid<=line ms" + detail.str();
    else o.detail += detail.str();
    return o;
}

Outcome two_label_shift()
{
    Outcome o;
    const WorldPosition d{0, 0, 0};
    const double h = 1.2, d1 = 10.0, d2 = 20.0;
    const double expected = h * d2 / d1;
    const Scene s = gen_line(2, d1, d1, {h, h});
    const LayoutLabels l = layout_labels(s, d);
    const double shifted = shift_over(l.rects[1], l.rects[0], d, 0.0);
    if (std::abs(shifted - expected) > kShiftTol) fail(o, "shift_over " + std::to_string(shifted));

    std::vector<double> initial;
    const auto labels = resolved(s, d, &initial, {0.0, false});
    const auto ref = oracle_reference(labels, initial, d, 0.0);
    if (!ref.ok) fail(o, "oracle reference rejects greedy placement");
    if (std::abs(ref.entries[1].reference_y - expected) > kReferenceTol)
        fail(o, "reference " + std::to_string(ref.entries[1].reference_y));
    if (std::abs(labels[1].rect.anchor.y - expected) > kShiftTol) fail(o, "resolve_all " + std::to_string(labels[1].rect.anchor.y));
    if (o.pass) o.detail = "shift 2.4 matched by resolver and reference";
    return o;
}

Outcome equation_suite()
{
    Outcome o;
    const double ps[] = {0.0, 0.25, 0.5, 1.0};
    const double want[] = {0.0, 0.146447, 0.5, 1.0};
    for (int k = 0; k < 4; ++k)
        if (std::abs(ease_progress(EasingKind::SineInOut, ps[k]) - want[k]) > kEasingTol) fail(o, "sine-in-out at " + std::to_string(ps[k]));

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 1000; ++k) {
        const double e = u(rng);
        if (fade_alpha(true, e) + fade_alpha(false, e) != 1.0) fail(o, "fade complementarity at e=" + std::to_string(e));
        const auto b = aggregate_transition({}, {1, 0, 1}, e);
        if (b.member_alpha + b.super_alpha != 1.0) fail(o, "aggregation complementarity at e=" + std::to_string(e));
    }

    const WorldPosition a{1, 2, 3}, b{4, -2, 9};
    if (!(interpolate_position(a, b, 0.0) == a) || !(interpolate_position(a, b, 1.0) == b) ||
        !(interpolate_position(a, b, 0.5) == WorldPosition{2.5, 0, 6}))
        fail(o, "position interpolation identities");

    const WorldPosition m{10, 0, -50}, sp{30, 0, -80};
    const auto s0 = aggregate_transition(m, sp, 0.0), s1 = aggregate_transition(m, sp, 1.0), sh = aggregate_transition(m, sp, 0.5);
    if (!(s0.member_position == m) || s0.member_alpha != 1.0 || s0.super_alpha != 0.0) fail(o, "aggregation start");
    if (!(s1.member_position == sp) || s1.member_alpha != 0.0 || s1.super_alpha != 1.0) fail(o, "aggregation end");
    if (!(sh.member_position == WorldPosition{20, 0, -65}) || sh.member_alpha != 0.5 || sh.super_alpha != 0.5)
        fail(o, "aggregation midpoint");
    if (o.pass) o.detail = "easing values, complementarity, interpolation identities";
    return o;
}

Outcome orientation_invariance()
{
    Outcome o;
    std::mt19937 rng(4242);
    std::uniform_int_distribution<std::size_t> count(2, 30);
    std::uniform_real_distribution<double> x(-150, 150), z(-150, 150), yaw(-360, 360), pitch(-89, 89), w(2, 10);
    for (int k = 0; k < 50; ++k) {
        auto scene = std::make_shared<Scene>();
        for (std::size_t i = 0, n = count(rng); i < n; ++i)
            scene->pois.push_back({"p" + std::to_string(i), "P", {x(rng), 0, z(rng)}, {}, "", "", {10.0 * i, "min"}, {}});
        const double base = w(rng);
        scene->label_extents = {{base, base}, {1.5 * base, 1.5 * base}, {2 * base, 2.2 * base}};
        const WorldPosition at{x(rng) / 3, 1.6, z(rng) / 3};

        LabelEngine reference(scene);
        const FrameSnapshot first = reference.update_frame(make_pose(at), 0.0);
        for (int r = 0; r < 8; ++r) {
            LabelEngine engine(scene);
            const FrameSnapshot s = engine.update_frame(make_pose(at, yaw(rng), pitch(rng)), 0.0);
            if (!same_labels(first, s) || s.instrumentation.shifts != first.instrumentation.shifts ||
                s.instrumentation.rays_cast != first.instrumentation.rays_cast)
                fail(o, "scene " + std::to_string(k) + " orientation " + std::to_string(r));
        }
    }
    if (o.pass) o.detail = "50 scenes x 8 orientations bit-identical";
    return o;
}

Outcome lod_banding()
{
    Outcome o;
    std::vector<Anchor> anchors;
    std::vector<LodCandidate> candidates;
    for (int k = 0; k < 8; ++k) {
        const double d = 100.0 * (k + 1);
        const std::string id = "l" + std::to_string(k);
        const Extent e{2.0 * d * std::tan(deg_to_rad(5.0) / 2.0), 10.0};
        anchors.push_back({id, {0, 0, -d}});
        candidates.push_back({id, {0, 0, -d}, LodExtents::uniform(e)});
    }
    const auto a = assign_lods(sort_by_distance(anchors, {0, 0, 0}), candidates, LodThresholds{45, 20, 30}, {0, 0, 0});
    const char want[] = "HHHHMMLL";
    std::string got;
    for (int k = 0; k < 8; ++k) {
        const LodLevel l = a.levels.at("l" + std::to_string(k));
        got += l == LodLevel::Highest ? 'H' : l == LodLevel::Middle ? 'M' : 'L';
    }
    if (got != want) fail(o, "bands " + got);

    std::mt19937 rng(8);
    std::uniform_real_distribution<double> c(-500, 500);
    for (int k = 0; k < 100; ++k) {
        const WorldPosition p{c(rng), 0, c(rng)};
        const std::vector<Anchor> one{{"only", p}};
        const std::vector<LodCandidate> cand{{"only", p, LodExtents{}}};
        const WorldPosition device{c(rng), 1.6, c(rng)};
        if (assign_lods(sort_by_distance(one, device), cand, LodThresholds{}, device).levels.at("only") != LodLevel::Highest)
            fail(o, "singleton not Highest");
    }
    if (o.pass) o.detail = "bands " + got + ", singletons Highest";
    return o;
}

Outcome aggregation()
{
    Outcome o;
    const auto scene = std::make_shared<const Scene>(load_example("theme-park"));
    if (scene->pois.size() != 35 || scene->groups.size() != 7) fail(o, "theme-park shape");

    for (const LabelGroup& g : scene->groups) {
        double x = 0, z = 0;
        for (const auto& id : g.member_ids) {
            x += scene->find_poi(id)->position.x;
            z += scene->find_poi(id)->position.z;
        }
        const WorldPosition inside{x / g.member_ids.size(), 1.6, z / g.member_ids.size()};
        const auto r = aggregate_groups(*scene, inside);
        if (r.aggregated.at(g.group_id)) fail(o, "device inside " + g.group_id + " aggregates it");
        LabelEngine engine(scene);
        const FrameSnapshot s = engine.update_frame(make_pose(inside), 0.0);
        for (const LabelRecord& rec : s.labels)
            if (rec.kind == EntityKind::Super && rec.group_id == g.group_id) fail(o, "super label shown for " + g.group_id);
    }

    LabelEngine engine(scene);
    const FrameSnapshot far = engine.update_frame(make_pose({0, 1.6, 20000}), 0.0);
    std::size_t supers = 0;
    for (const LabelRecord& rec : far.labels) {
        if (rec.kind != EntityKind::Super) continue;
        ++supers;
        const LabelGroup* g = scene->find_group(rec.group_id.value_or(rec.id));
        if (!g) {
            fail(o, "unknown group " + rec.id);
            continue;
        }
        double x = 0, z = 0;
        for (const auto& id : g->member_ids) {
            x += scene->find_poi(id)->position.x;
            z += scene->find_poi(id)->position.z;
        }
        x /= g->member_ids.size();
        z /= g->member_ids.size();
        if (std::abs(rec.position.x - x) > kMeanTol || std::abs(rec.position.z - z) > kMeanTol) fail(o, "mean of " + g->group_id);
    }
    if (supers != 6) fail(o, std::to_string(supers) + " super labels from far away");
    if (o.pass) o.detail = "inside keeps group, far shows 6 super labels at member means";
    return o;
}

std::vector<FrameSnapshot> run_simulation(const Scene& scene, const PoseScript& script, double duration)
{
    SimulateOptions options;
    options.fps = 30;
    options.duration_s = duration;
    options.timings = false;
    std::ostringstream out;
    simulate(scene, script, options, out);
    std::vector<FrameSnapshot> frames;
    std::istringstream in(out.str());
    for (std::string line; std::getline(in, line);) frames.push_back(snapshot_from_json(nlohmann::json::parse(line)));
    return frames;
}

Outcome fixed_point()
{
    Outcome o;
    const Scene scene = load_example("theme-park");
    const double settle = scene.transition_duration_s;
    const DevicePose rest = make_pose(scene.default_position);

    const auto still = run_simulation(scene, PoseScript{{{0.0, rest}}}, 2.0);
    if (still.size() != 60) fail(o, "static run has " + std::to_string(still.size()) + " frames");
    for (std::size_t k = 1; k < still.size(); ++k)
        if (still[k].timestamp >= settle && !same_labels(still[k - 1], still[k])) fail(o, "static frame " + std::to_string(k));

    // Walk into the park, then stand still.
    const double hold = 1.5;
    const DevicePose inside = make_pose({-450, 1.6, -250}, 30);
    const auto walk = run_simulation(scene, PoseScript{{{0.0, rest}, {hold, inside}}}, hold + settle + 1.0);
    const FrameSnapshot* settled = nullptr;
    for (const FrameSnapshot& f : walk) {
        if (f.timestamp < hold + settle) continue;
        if (!settled) settled = &f;
        else if (!same_labels(*settled, f)) fail(o, "frame at t=" + std::to_string(f.timestamp) + " differs after settling");
    }
    if (!settled) fail(o, "no frames after settling");
    if (same_labels(walk.front(), walk.back())) fail(o, "walk did not change the labels");
    if (o.pass) o.detail = "identical frames once transition_duration_s has elapsed";
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"occlusion-freedom", occlusion_freedom},
        {"worst-case-complexity", worst_case_complexity},
        {"layout-ordering", layout_ordering},
        {"two-label-shift", two_label_shift},
        {"equation-suite", equation_suite},
        {"orientation-invariance", orientation_invariance},
        {"lod-banding", lod_banding},
        {"aggregation", aggregation},
        {"fixed-point-stability", fixed_point},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
