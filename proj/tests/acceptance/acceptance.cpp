// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "flowspectra/flowspectra.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

using namespace flowspectra;

namespace {

constexpr double kSphereLambdaTol = 0.02;
constexpr double kSphereRadiusTol = 0.005;
constexpr double kSphereSeconds = 60.0;
constexpr double kCircleLambdaTol = 0.01;
constexpr double kCircleSeconds = 10.0;
constexpr double kVariationTol = 0.05;
constexpr double kPerturbedVariationTol = 0.08;
constexpr double kRateIdentityTol = 0.05;
constexpr double kInitialRate = 8.0;
constexpr double kInitialRateTol = 0.4;
constexpr double kSpreadTol = 1e-2;
constexpr double kAreaTol = 0.05;
constexpr double kSphereEigenTol = 0.01;
constexpr double kCircleEigenTol = 0.001;
constexpr double kResidualTol = 1e-8;
constexpr double kOrthogonalityTol = 1e-10;
constexpr double kNormTol = 1e-10;
constexpr double kConstantShiftTol = 1e-12;

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail)
{
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", x);
    return buf;
}

ExperimentConfig config(const std::string& name)
{
    return load_config(std::string(FLOWSPECTRA_SOURCE_DIR) + "/configs/" + name);
}

template <DiscreteHypersurface M>
ExperimentRun<M> run_config(const ExperimentConfig& cfg, double* seconds = nullptr)
{
    const auto start = std::chrono::steady_clock::now();
    auto run = run_flow(std::get<M>(build_mesh(cfg.geometry, cfg.seed)), cfg);
    if (seconds) {
        *seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return run;
}

std::string trace_text(const FlowTrace& trace)
{
    std::ostringstream out;
    write_trace_csv(out, trace);
    return out.str();
}

double max_lambda_error(const FlowTrace& trace, double n)
{
    double worst = 0.0;
    for (const auto* row : trace.spectral_rows()) {
        const double exact = sphere_at(1.0, static_cast<int>(n), row->t).lambda;
        worst = std::max(worst, std::abs(row->spectral->lambda - exact) / exact);
    }
    return worst;
}

template <typename F>
void guarded(int id, const std::string& name, F&& body)
{
    try {
        body();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("error: ") + e.what());
    }
}

} // namespace

int main()
{
    const auto sphere_cfg = config("sphere_mcf.ini");
    const auto circle_cfg = config("circle_mcf.ini");
    double sphere_seconds = 0.0;
    double circle_seconds = 0.0;
    const auto sphere = run_config<SurfaceMesh>(sphere_cfg, &sphere_seconds);
    const auto circle = run_config<CurveMesh>(circle_cfg, &circle_seconds);

    guarded(1, "sphere trace fidelity", [&] {
        const double lambda_err = max_lambda_error(sphere.trace, 2);
        double radius_err = 0.0;
        for (const auto& row : sphere.trace.rows) {
            const double r = std::sqrt(row.area / (4.0 * std::numbers::pi));
            const double exact = sphere_at(1.0, 2, row.t).radius;
            radius_err = std::max(radius_err, std::abs(r - exact) / exact);
        }
        const bool ok = !sphere.trace.truncated && lambda_err <= kSphereLambdaTol &&
                        radius_err <= kSphereRadiusTol && sphere_seconds <= kSphereSeconds;
        report(1, "sphere trace fidelity", ok,
               "lambda err " + num(lambda_err) + ", radius err " + num(radius_err) + ", " +
                   num(sphere_seconds) + " s, " + std::to_string(sphere.trace.spectral_rows().size()) +
                   " samples");
    });

    guarded(2, "circle trace fidelity", [&] {
        const double lambda_err = max_lambda_error(circle.trace, 1);
        const bool ok = !circle.trace.truncated && lambda_err <= kCircleLambdaTol &&
                        circle_seconds <= kCircleSeconds;
        report(2, "circle trace fidelity", ok,
               "lambda err " + num(lambda_err) + ", " + num(circle_seconds) + " s");
    });

    guarded(3, "first variation", [&] {
        const auto perturbed = run_config<SurfaceMesh>(config("perturbed_weighted.ini"));
        const double es = compare_variation(sphere.trace).max_relative_error;
        const double ec = compare_variation(circle.trace).max_relative_error;
        const double ep = compare_variation(perturbed.trace).max_relative_error;
        const bool ok = es <= kVariationTol && ec <= kVariationTol && ep <= kPerturbedVariationTol;
        report(3, "first variation", ok,
               "sphere " + num(es) + ", circle " + num(ec) + ", perturbed weighted " + num(ep));
    });

    guarded(4, "sphere rate identity", [&] {
        double worst = 0.0;
        for (const auto* row : sphere.trace.spectral_rows()) {
            const double expected = 2.0 * row->h_mean * row->h_mean / 2.0;
            const double ratio = row->spectral->rhs_variation / row->spectral->lambda;
            worst = std::max(worst, std::abs(ratio - expected) / expected);
        }
        const double rate0 = sphere.trace.rows.front().spectral->rhs_variation;
        const bool ok = worst <= kRateIdentityTol && std::abs(rate0 - kInitialRate) <= kInitialRateTol;
        report(4, "sphere rate identity", ok, "max rel err " + num(worst) + ", rate(0) " + num(rate0));
    });

    guarded(5, "monotonicity under MCF", [&] {
        const auto vs = check_theorem_tt1(sphere.trace);
        const auto vc = check_theorem_tt1(circle.trace);
        const bool ok = vs.hypothesis_holds && vs.conclusion_holds && vc.hypothesis_holds &&
                        vc.conclusion_holds;
        report(5, "monotonicity under MCF", ok,
               "max decrease sphere " + num(vs.max_violation) + ", circle " + num(vc.max_violation));
    });

    guarded(6, "monotone quantities", [&] {
        const auto cfg = config("squared_vp.ini");
        const auto run = run_config<SurfaceMesh>(cfg);
        const auto verdict = check_theorem_psi_phi(run.trace, cfg.verify.down_exponent);
        const auto series = monotone_quantities(run.trace, cfg.verify.down_exponent);
        bool bounds = true;
        for (const auto& row : run.trace.rows) {
            bounds = bounds && series.c1 * std::exp(-series.c2 * row.t) <= row.h_min * (1.0 + 1e-12) &&
                     row.h_max <= series.c3;
        }
        const double tol = kMonotoneTolerance * series.samples.front().lambda;
        double up_drop = 0.0;
        double down_rise = 0.0;
        for (std::size_t i = 1; i < series.samples.size(); ++i) {
            up_drop = std::max(up_drop, series.samples[i - 1].q_up - series.samples[i].q_up);
            down_rise = std::max(down_rise, series.samples[i].q_down - series.samples[i - 1].q_down);
        }
        const bool ok = verdict.hypothesis_holds && verdict.conclusion_holds && bounds &&
                        up_drop <= tol && down_rise <= tol && series.samples.size() >= 3;
        report(6, "monotone quantities", ok,
               "C1 " + num(series.c1) + ", C2 " + num(series.c2) + ", C3 " + num(series.c3) +
                   ", Q_up drop " + num(up_drop) + ", Q_down rise " + num(down_rise) + ", " +
                   std::to_string(series.samples.size()) + " samples");
    });

    guarded(7, "power flow pinching", [&] {
        const auto run = run_config<SurfaceMesh>(config("power2.ini"));
        const auto v = check_theorem_hk(run.trace, kSpreadTol);
        double spread_max = 0.0;
        for (const auto& row : run.trace.rows) {
            spread_max = std::max(spread_max, row.a_spread);
        }
        const double spread0 = run.trace.rows.front().a_spread;
        const bool ok = v.hypothesis_holds && v.conclusion_holds && spread_max <= spread0 + kSpreadTol;
        report(7, "power flow pinching", ok,
               "spread " + num(spread0) + " -> max " + num(spread_max) + ", lambda max decrease " +
                   num(v.max_violation));
    });

    guarded(8, "area evolution", [&] {
        const double es = area_identity_error(sphere.trace);
        const double ec = area_identity_error(circle.trace);
        report(8, "area evolution", es <= kAreaTol && ec <= kAreaTol,
               "sphere " + num(es) + ", circle " + num(ec));
    });

    guarded(9, "spectral correctness", [&] {
        bool ok = true;
        std::string detail;
        auto check = [&](const auto& mesh, double exact, double tol, const std::string& label) {
            const auto st = geometry_state(mesh);
            const auto zero = WeightField::constant(mesh.num_vertices());
            const auto ops = assemble(mesh, st, zero);
            const auto eig = first_eigenpair(ops);
            const double err = std::abs(eig.lambda - exact) / exact;
            const double ortho = std::abs(eig.f.dot(ops.mass));
            const double norm = std::abs(eig.f.dot(ops.mass.cwiseProduct(eig.f)) - 1.0);
            const auto shifted = first_eigenpair(assemble(mesh, st, WeightField::constant(mesh.num_vertices(), 0.7)));
            const double shift = std::abs(shifted.lambda - eig.lambda) / eig.lambda;
            ok = ok && err <= tol && eig.residual <= kResidualTol && ortho <= kOrthogonalityTol &&
                 norm <= kNormTol && shift <= kConstantShiftTol;
            detail += label + " lambda " + num(eig.lambda) + " residual " + num(eig.residual) +
                      " fM1 " + num(ortho) + " |fMf-1| " + num(norm) + " shift " + num(shift) + "; ";
        };
        check(icosphere(1.0, 4), 2.0, kSphereEigenTol, "sphere");
        check(regular_polygon(256), 1.0, kCircleEigenTol, "circle");
        detail.resize(detail.size() - 2);
        report(9, "spectral correctness", ok, detail);
    });

    guarded(10, "metric comparison", [&] {
        const auto vs = check_metric_comparison(icosphere(1.0, 4), WeightField::constant(2562));
        const auto vc = check_metric_comparison(regular_polygon(256), WeightField::constant(256));
        report(10, "metric comparison", vs.conclusion_holds && vc.conclusion_holds,
               "sphere " + std::to_string(vs.samples) + " inequalities, circle " +
                   std::to_string(vc.samples));
    });

    guarded(11, "determinism", [&] {
        const auto sphere_again = run_config<SurfaceMesh>(sphere_cfg);
        const auto circle_again = run_config<CurveMesh>(circle_cfg);
        const bool ok = trace_text(sphere.trace) == trace_text(sphere_again.trace) &&
                        trace_text(circle.trace) == trace_text(circle_again.trace);
        report(11, "determinism", ok, "sphere and circle trace.csv compared byte for byte");
    });

    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
