#pragma once

#include "flowspectra/config.hpp"
#include "flowspectra/generators.hpp"
#include "flowspectra/io.hpp"

#include <filesystem>
#include <functional>
#include <variant>

namespace flowspectra {

using AnyMesh = std::variant<CurveMesh, SurfaceMesh>;

inline AnyMesh build_mesh(const GeometryConfig& g, std::uint64_t seed)
{
    if (g.type == "polygon") {
        return regular_polygon(static_cast<Index>(g.vertices), g.radius);
    }
    if (g.type == "icosphere") {
        return icosphere(g.radius, g.subdivision);
    }
    if (g.type == "ellipsoid") {
        return ellipsoid(g.a, g.b, g.c, g.subdivision);
    }
    if (g.type == "perturbed_icosphere") {
        return perturbed_icosphere(g.radius, g.subdivision, g.amplitude, seed);
    }
    if (g.type == "off") {
        return read_off(g.file);
    }
    if (g.type == "curve") {
        return read_curve_csv(g.file);
    }
    throw ConfigError("unknown geometry type " + g.type);
}

template <DiscreteHypersurface M>
WeightField build_weight(const M& mesh, const WeightConfig& w)
{
    if (!w.file.empty()) {
        auto values = read_vertex_values(w.file);
        if (values.size() != mesh.num_vertices()) {
            throw ConfigError(w.file + ": " + std::to_string(values.size()) + " values for " +
                              std::to_string(mesh.num_vertices()) + " vertices");
        }
        return WeightField(std::move(values));
    }
    const Expression expr(w.phi);
    return WeightField::sample(mesh, [&](const Eigen::Vector3d& p) { return expr(p); });
}

enum class ExitCode : int { Ok = 0, Failure = 1, Truncated = 2 };

/// Progress messages from the orchestration layer.
using Logger = std::function<void(const std::string&)>;

template <DiscreteHypersurface M>
struct ExperimentRun {
    M initial;
    WeightField phi;
    FlowTrace trace;
    std::optional<EigenPair> final_eigenpair;
};

template <DiscreteHypersurface M>
ExperimentRun<M> run_flow(const M& mesh, const ExperimentConfig& cfg, const Logger& log = {})
{
    ExperimentRun<M> run{mesh, build_weight(mesh, cfg.weight), {}, {}};
    EigenOptions eo;
    eo.block_size = cfg.block_size;
    eo.tolerance = cfg.eigen_tolerance;
    eo.seed = cfg.seed;
    auto observer = std::make_shared<SpectralObserver<M>>(run.phi, eo);
    std::size_t samples = 0;
    Observer<M> hook = [&](const M& m, const GeometryState<M>& st, const std::vector<double>& s,
                           TraceRow& row) {
        (*observer)(m, st, s, row);
        ++samples;
        if (log && samples % 10 == 1) {
            log("t=" + format_number(row.t) + " lambda=" + format_number(row.spectral->lambda));
        }
    };
    run.trace = evolve(mesh, cfg.law, cfg.evolve, hook);
    run.final_eigenpair = observer->last();
    if (cfg.law.kind == SpeedLaw::Kind::SquaredVolumePreserving && run.trace.rows.front().h_min > 0.0 &&
        run.trace.spectral_rows().size() >= 2) {
        attach_monotone_quantities(run.trace, monotone_quantities(run.trace, cfg.verify.down_exponent));
    }
    return run;
}

/// Checks that apply to the trace's flow law.
inline std::vector<Verdict> applicable_verdicts(const FlowTrace& trace, const VerifyConfig& v)
{
    std::vector<Verdict> out;
    const auto spectral = trace.spectral_rows().size();
    if (spectral < 2) {
        return out;
    }
    switch (trace.law.kind) {
    case SpeedLaw::Kind::UnnormalizedMcf:
        out.push_back(check_theorem_tt1(trace));
        break;
    case SpeedLaw::Kind::Power:
        out.push_back(check_theorem_hk(trace, v.spread_tolerance));
        break;
    case SpeedLaw::Kind::SquaredVolumePreserving:
        out.push_back(check_theorem_psi_phi(trace, v.down_exponent));
        break;
    case SpeedLaw::Kind::VolumePreservingMcf:
        break;
    }
    if (spectral >= 3) {
        out.push_back(check_variation(trace, v.variation_tolerance, v.variation_floor));
    }
    return out;
}

template <DiscreteHypersurface M>
nlohmann::ordered_json summary_json(const ExperimentRun<M>& run, const ExperimentConfig& cfg,
                                    const std::vector<Verdict>& verdicts)
{
    const auto& tr = run.trace;
    const auto& last = tr.rows.back();
    nlohmann::ordered_json j;
    j["law"] = tr.law.name();
    j["dim"] = tr.dim;
    j["vertices"] = run.initial.num_vertices();
    j["t_end"] = cfg.evolve.t_end;
    j["t_final"] = last.t;
    j["steps"] = tr.rows.size() - 1;
    j["truncated"] = tr.truncated;
    j["reason"] = tr.reason;
    const auto spectral = tr.spectral_rows();
    if (!spectral.empty()) {
        j["lambda_initial"] = spectral.front()->spectral->lambda;
        j["lambda_final"] = spectral.back()->spectral->lambda;
    }
    j["area_final"] = last.area;
    j["volume_final"] = last.volume;
    j["H_min_final"] = last.h_min;
    j["H_max_final"] = last.h_max;
    if (run.final_eigenpair) {
        j["eigenpair"] = to_json(*run.final_eigenpair);
    }
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& v : verdicts) {
        checks.push_back(to_json(v));
    }
    j["checks"] = std::move(checks);
    return j;
}

/// Evolve with a spectral observer and write trace.csv, summary.json and
/// eigenfunction.csv into the output directory.
inline ExitCode cmd_evolve(const ExperimentConfig& cfg, const Logger& log = {})
{
    const AnyMesh mesh = build_mesh(cfg.geometry, cfg.seed);
    return std::visit(
        [&](const auto& m) {
            auto run = run_flow(m, cfg, log);
            std::filesystem::create_directories(cfg.output_dir);
            const std::filesystem::path dir(cfg.output_dir);
            write_trace_csv((dir / "trace.csv").string(), run.trace);
            const auto verdicts = applicable_verdicts(run.trace, cfg.verify);
            write_json((dir / "summary.json").string(), summary_json(run, cfg, verdicts));
            if (run.final_eigenpair) {
                write_eigenfunction_csv((dir / "eigenfunction.csv").string(), *run.final_eigenpair);
            }
            if (log) {
                log("wrote " + (dir / "trace.csv").string() + " (" +
                    std::to_string(run.trace.rows.size()) + " rows)");
            }
            if (run.trace.truncated) {
                if (log) {
                    log("truncated at t=" + format_number(run.trace.rows.back().t) + ": " +
                        run.trace.reason);
                }
                return ExitCode::Truncated;
            }
            return ExitCode::Ok;
        },
        mesh);
}

inline const std::vector<std::string>& theorem_names()
{
    static const std::vector<std::string> names = {"tt1",     "psi-phi", "hk",
                                                   "variation", "lemma21", "metric-cmp"};
    return names;
}

/// Area and metric evolution identities: area against the trace, metric on one
/// step of the initial mesh.
template <DiscreteHypersurface M>
Verdict check_lemma21(const M& initial, const FlowTrace& trace, double tolerance, double floor = 0.0)
{
    Verdict v;
    v.theorem = "lemma21";
    v.hypothesis_holds = true;
    const double area_error = area_identity_error(trace, floor);
    const double dt = 1e-3 * trace.rows.front().dt;
    const double metric_error = metric_identity_error(initial, trace.law, dt);
    v.samples = trace.rows.size();
    v.max_violation = std::max(area_error, metric_error);
    v.conclusion_holds = area_error <= tolerance && metric_error <= tolerance;
    v.details["area_relative_error"] = area_error;
    v.details["metric_relative_error"] = metric_error;
    v.details["tolerance"] = tolerance;
    return v;
}

template <DiscreteHypersurface M>
Verdict verify_on(const M& mesh, const ExperimentConfig& cfg, const std::string& theorem,
                  const Logger& log)
{
    if (theorem == "metric-cmp") {
        EigenOptions eo;
        eo.block_size = cfg.block_size;
        eo.tolerance = cfg.eigen_tolerance;
        eo.seed = cfg.seed;
        return check_metric_comparison(mesh, build_weight(mesh, cfg.weight), {0.05, 0.1, 0.3}, eo);
    }
    auto run = run_flow(mesh, cfg, log);
    std::filesystem::create_directories(cfg.output_dir);
    write_trace_csv((std::filesystem::path(cfg.output_dir) / "trace.csv").string(), run.trace);
    const auto& v = cfg.verify;
    if (theorem == "tt1") {
        return check_theorem_tt1(run.trace);
    }
    if (theorem == "psi-phi") {
        return check_theorem_psi_phi(run.trace, v.down_exponent);
    }
    if (theorem == "hk") {
        return check_theorem_hk(run.trace, v.spread_tolerance);
    }
    if (theorem == "variation") {
        return check_variation(run.trace, v.variation_tolerance, v.variation_floor);
    }
    return check_lemma21(mesh, run.trace, v.identity_tolerance, v.variation_floor);
}

/// Run one check and write verdict_<theorem>.json. Ok iff the hypothesis fails
/// or the conclusion holds. The verdict file is written even when the check
/// itself throws.
inline ExitCode cmd_verify(const ExperimentConfig& cfg, const std::string& theorem,
                           const Logger& log = {})
{
    const auto& names = theorem_names();
    if (std::find(names.begin(), names.end(), theorem) == names.end()) {
        throw ConfigError("unknown theorem '" + theorem + "'");
    }
    std::filesystem::create_directories(cfg.output_dir);
    const auto path = (std::filesystem::path(cfg.output_dir) / ("verdict_" + theorem + ".json")).string();
    Verdict verdict;
    try {
        const AnyMesh mesh = build_mesh(cfg.geometry, cfg.seed);
        verdict = std::visit([&](const auto& m) { return verify_on(m, cfg, theorem, log); }, mesh);
    } catch (const std::exception& e) {
        verdict.theorem = theorem;
        auto j = to_json(verdict);
        j["passed"] = false;
        j["error"] = e.what();
        write_json(path, j);
        throw;
    }
    write_json(path, to_json(verdict));
    if (log) {
        log(theorem + ": hypothesis " + (verdict.hypothesis_holds ? "holds" : "fails") +
            ", conclusion " + (verdict.conclusion_holds ? "holds" : "fails"));
    }
    return verdict.passed() ? ExitCode::Ok : ExitCode::Failure;
}

} // namespace flowspectra
