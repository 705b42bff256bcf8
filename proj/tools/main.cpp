#include "labelkit/scenario.hpp"
#include "labelkit/scene_io.hpp"
#include "labelkit/simulate.hpp"
#include "labelkit/stream.hpp"

#include <CLI11.hpp>
#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace labelkit;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

// Bundled example names are accepted wherever a scene path is expected.
Scene read_scene(const std::string& arg)
{
    if (!std::filesystem::exists(arg) && (arg == "theme-park" || arg == "local-shops")) return load_example(arg);
    return load_scene(arg);
}

int cmd_validate(const std::string& path)
{
    Scene scene;
    try {
        scene = read_scene(path);
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    const auto violations = validate_scene(scene);
    for (const auto& v : violations) std::cout << v.entity << ": " << v.message << '\n';
    if (violations.empty()) {
        std::cout << "ok: " << scene.pois.size() << " pois, " << scene.groups.size() << " groups\n";
        return kExitOk;
    }
    std::cout << violations.size() << " violation(s)\n";
    return kExitViolation;
}

struct SimulateArgs {
    std::string scene;
    std::string script;
    double fps = 30.0;
    std::optional<double> duration;
    std::string out;
    bool no_timings = false;
};

int cmd_simulate(const SimulateArgs& a)
{
    Scene scene;
    PoseScript script;
    try {
        scene = read_scene(a.scene);
        if (a.script.empty()) {
            DevicePose pose;
            pose.position = scene.default_position;
            pose.yaw_deg = scene.default_yaw_deg;
            pose.pitch_deg = scene.default_pitch_deg;
            script.keyframes.push_back({0.0, pose});
        } else {
            script = load_pose_script(a.script);
        }
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (auto violations = validate_scene(scene); !violations.empty()) {
        for (const auto& v : violations) std::cerr << v.entity << ": " << v.message << '\n';
        return kExitViolation;
    }

    SimulateOptions options;
    options.fps = a.fps;
    options.timings = !a.no_timings;
    options.duration_s = a.duration ? *a.duration
                                    : script.keyframes.back().t + scene.transition_duration_s;

    try {
        std::size_t frames = 0;
        if (a.out.empty() || a.out == "-") {
            frames = simulate(scene, script, options, std::cout);
        } else {
            std::ofstream file(a.out);
            if (!file) {
                std::cerr << "error: cannot write " << a.out << '\n';
                return kExitUsage;
            }
            frames = simulate(scene, script, options, file);
        }
        spdlog::debug("wrote {} frames", frames);
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

struct BenchArgs {
    std::vector<std::string> layouts;
    std::vector<std::size_t> ns;
    int reps = 5;
    std::string csv;
};

int cmd_bench(const BenchArgs& a)
{
    BenchOptions options;
    if (!a.layouts.empty()) {
        options.layouts.clear();
        for (const auto& name : a.layouts) {
            auto kind = layout_from_name(name);
            if (!kind) {
                std::cerr << "error: unknown layout '" << name << "'\n";
                return kExitUsage;
            }
            options.layouts.push_back(*kind);
        }
    }
    if (!a.ns.empty()) options.ns = a.ns;
    options.repetitions = a.reps;

    std::vector<BenchRecord> records;
    try {
        records = run_bench(options);
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << bench_table(records);
    if (!a.csv.empty()) {
        std::ofstream file(a.csv);
        if (!file) {
            std::cerr << "error: cannot write " << a.csv << '\n';
            return kExitUsage;
        }
        file << bench_csv(records);
    }
    return kExitOk;
}

struct ServeArgs {
    std::string scene;
    std::string address = "127.0.0.1";
    unsigned short port = kDefaultStreamPort;
    unsigned short ws_port = kDefaultStreamPort + 1;
    bool no_ws = false;
    double fps = 30.0;
};

int cmd_serve(const ServeArgs& a)
{
    std::shared_ptr<const Scene> scene;
    try {
        scene = std::make_shared<const Scene>(read_scene(a.scene));
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    if (auto violations = validate_scene(*scene); !violations.empty()) {
        for (const auto& v : violations) std::cerr << v.entity << ": " << v.message << '\n';
        return kExitViolation;
    }

    StreamConfig config;
    config.address = a.address;
    config.port = a.port;
    config.fps = a.fps;
    if (a.no_ws) config.ws_port.reset();
    else config.ws_port = a.ws_port;

    StreamServer server(scene, config);
    try {
        server.start();
    } catch (const LabelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cout << "tcp " << a.address << ':' << server.tcp_port();
    if (auto ws = server.ws_port()) std::cout << " ws " << a.address << ':' << *ws;
    std::cout << std::endl;
    server.wait();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_mt("labelkit"));
    spdlog::cfg::load_env_levels();

    CLI::App app{"Label placement engine for outdoor AR scenes"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "labelkit 1.0");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scene file against every structural invariant");
    validate->add_option("scene", validate_path, "Scene JSON path or bundled example name")->required();

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a pose script and write one FrameSnapshot JSON per line");
    simulate_cmd->add_option("scene", sim.scene, "Scene JSON path or bundled example name")->required();
    simulate_cmd->add_option("script", sim.script, "Pose script JSON; omitted means the scene's default pose");
    simulate_cmd->add_option("--fps", sim.fps, "Frames per second")->check(CLI::Range(1.0, 240.0))->capture_default_str();
    simulate_cmd->add_option("--duration", sim.duration,
                             "Simulated seconds (default: last keyframe plus transition duration)")
        ->check(CLI::NonNegativeNumber);
    simulate_cmd->add_option("--out", sim.out, "Output file (default: stdout)");
    simulate_cmd->add_flag("--no-timings", sim.no_timings, "Zero stage timings for byte-identical output");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time occlusion resolution on synthetic layouts");
    bench_cmd->add_option("--layouts", bench.layouts, "Layouts to run: circle, grid, line")->delimiter(',');
    bench_cmd->add_option("--ns", bench.ns, "Label counts")->delimiter(',')->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", bench.reps, "Timed repetitions per cell (minimum 3)")
        ->check(CLI::Range(3, 1000000))
        ->capture_default_str();
    bench_cmd->add_option("--csv", bench.csv, "Also write layout,n,median_ms,rays,shifts to this file");

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Stream frames for a scene over TCP and WebSocket");
    serve_cmd->add_option("scene", serve.scene, "Scene JSON path or bundled example name")->required();
    serve_cmd->add_option("--address", serve.address, "Listen address")->capture_default_str();
    serve_cmd->add_option("--port", serve.port, "TCP port, line-delimited JSON (0 picks a free port)")
        ->capture_default_str();
    serve_cmd->add_option("--ws-port", serve.ws_port, "WebSocket port (0 picks a free port)")->capture_default_str();
    serve_cmd->add_flag("--no-ws", serve.no_ws, "Disable the WebSocket listener");
    serve_cmd->add_option("--fps", serve.fps, "Frames per second per session")
        ->check(CLI::Range(1.0, 240.0))
        ->capture_default_str();
    app.footer("Log verbosity: SPDLOG_LEVEL=debug|info|warn|error|off");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (*validate) return cmd_validate(validate_path);
    if (*simulate_cmd) return cmd_simulate(sim);
    if (*bench_cmd) return cmd_bench(bench);
    if (*serve_cmd) return cmd_serve(serve);
    return kExitUsage;
}
