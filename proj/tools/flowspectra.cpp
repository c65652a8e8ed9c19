#include "flowspectra/flowspectra.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = flowspectra;

namespace {

void configure_logging()
{
    auto logger = spdlog::stderr_color_mt("flowspectra");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("FLOWSPECTRA_LOG")) {
        const std::string level = env;
        if (level == "error") {
            spdlog::set_level(spdlog::level::err);
        } else if (level == "debug") {
            spdlog::set_level(spdlog::level::debug);
        } else if (level != "info") {
            spdlog::warn("FLOWSPECTRA_LOG={} not recognized, using info", level);
        }
    }
}

int plot(const std::string& trace_path, const std::string& out_path)
{
    const auto table = fs::read_trace_csv(trace_path);
    fs::PlotAnnotation note;
    const auto summary = std::filesystem::path(trace_path).parent_path() / "summary.json";
    if (std::filesystem::exists(summary)) {
        const auto j = fs::read_json(summary.string());
        note.truncated = j.value("truncated", false);
        note.reason = j.value("reason", std::string{});
    }
    const std::string svg = fs::render_trace_svg(table, note);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        throw fs::Error("cannot write " + out_path);
    }
    out << svg;
    spdlog::info("wrote {}", out_path);
    return 0;
}

int oracle_sphere(double radius, int n, double t)
{
    const auto s = fs::sphere_at(radius, n, t);
    nlohmann::ordered_json j;
    j["R"] = radius;
    j["n"] = n;
    j["t"] = t;
    j["radius"] = s.radius;
    j["H"] = s.mean_curvature;
    j["lambda"] = s.lambda;
    j["lambda_rate"] = fs::example_rate(radius, n, t);
    j["singular_time"] = s.singular_time;
    std::cout << fs::dump_json(j);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    configure_logging();

    CLI::App app{"Weighted Laplacian spectra along curvature flows"};
    app.require_subcommand(1);

    std::string config_path;
    auto* evolve = app.add_subcommand("evolve", "Run a flow and record the spectral trace");
    evolve->add_option("config", config_path, "Experiment config (INI)")->required();

    std::string verify_config;
    std::string theorem;
    auto* verify = app.add_subcommand("verify", "Run one monotonicity or identity check");
    verify->add_option("config", verify_config, "Experiment config (INI)")->required();
    verify->add_option("--theorem", theorem, "tt1 | psi-phi | hk | variation | lemma21 | metric-cmp")
        ->required();

    std::string trace_path;
    std::string svg_path;
    auto* plot_cmd = app.add_subcommand("plot", "Render a trace CSV as SVG");
    plot_cmd->add_option("trace", trace_path, "trace.csv")->required();
    plot_cmd->add_option("-o,--output", svg_path, "Output SVG")->required();

    auto* oracle = app.add_subcommand("oracle", "Closed-form reference solutions");
    oracle->require_subcommand(1);
    double radius = 1.0;
    int n = 2;
    double t = 0.0;
    auto* sphere = oracle->add_subcommand("sphere", "Round sphere shrinking under MCF");
    sphere->add_option("--R", radius, "Initial radius")->required();
    sphere->add_option("--n", n, "Dimension of the sphere")->required();
    sphere->add_option("--t", t, "Time")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const fs::Logger log = [](const std::string& msg) { spdlog::info("{}", msg); };
    try {
        if (*evolve) {
            const auto cfg = fs::load_config(config_path);
            spdlog::debug("config {} parsed", config_path);
            return static_cast<int>(fs::cmd_evolve(cfg, log));
        }
        if (*verify) {
            const auto& names = fs::theorem_names();
            if (std::find(names.begin(), names.end(), theorem) == names.end()) {
                spdlog::error("unknown theorem '{}'", theorem);
                return 1;
            }
            const auto cfg = fs::load_config(verify_config);
            return static_cast<int>(fs::cmd_verify(cfg, theorem, log));
        }
        if (*plot_cmd) {
            return plot(trace_path, svg_path);
        }
        if (*sphere) {
            return oracle_sphere(radius, n, t);
        }
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 1;
}
