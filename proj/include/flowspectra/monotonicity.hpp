#pragma once

#include "flowspectra/flow.hpp"
#include "flowspectra/spectral.hpp"

#include <map>
#include <string>

namespace flowspectra {

/// Quadrature of the first-eigenvalue variation along dF/dt = -S nu:
///   dlambda/dt = lambda int S H f^2 dmu + 2 int S h(grad f, grad f) dmu
///                - int |grad f|^2 S H dmu.
struct VariationReport {
    double t = 0.0;
    double term_rayleigh = 0.0;
    double term_shape = 0.0;
    double term_area = 0.0;
    double rhs_general = 0.0;
    /// Filled in when compared against a trace; NaN otherwise.
    double fd_lambda_dot = std::numeric_limits<double>::quiet_NaN();
    double relative_error = std::numeric_limits<double>::quiet_NaN();
};

/// The first term uses the lumped measure (consistent with f^T M f = 1). The two
/// gradient terms are integrated per element: the element gradient of f is
/// paired with the corner average of S h (resp. S H), weighted like K.
template <DiscreteHypersurface M>
VariationReport variation_rhs(const M& mesh, const GeometryState<M>& state,
                              const WeightField& phi, const EigenPair& eig,
                              const std::vector<double>& s)
{
    const Index n = mesh.num_vertices();
    if (static_cast<Index>(eig.f.size()) != n || phi.size() != n || s.size() != n) {
        throw Error("eigenpair, weight or speed size does not match mesh");
    }
    const auto density = phi.density();
    const auto& h = state.mean_curvature;

    VariationReport r;
    for (Index v = 0; v < n; ++v) {
        const double fv = eig.f[static_cast<Eigen::Index>(v)];
        r.term_rayleigh += density[v] * state.dual_area[v] * s[v] * h[v] * fv * fv;
    }
    r.term_rayleigh *= eig.lambda;

    for (const auto& e : mesh.elements()) {
        double omega = 0.0;
        for (Index v : e) {
            omega += density[v];
        }
        const double corners = static_cast<double>(e.size());
        omega /= corners;
        const double w = omega * element_measure(mesh, e);
        const auto grads = basis_gradients(mesh, e);
        typename M::Point g = M::Point::Zero();
        for (int a = 0; a <= M::dim; ++a) {
            g += eig.f[static_cast<Eigen::Index>(e[a])] * grads[a];
        }
        double shape = 0.0;
        double sh = 0.0;
        for (Index v : e) {
            shape += s[v] * g.dot(state.shape_operator[v] * g);
            sh += s[v] * h[v];
        }
        r.term_shape += 2.0 * w * shape / corners;
        r.term_area -= w * g.squaredNorm() * sh / corners;
    }
    r.rhs_general = r.term_rayleigh + r.term_shape + r.term_area;
    return r;
}

template <DiscreteHypersurface M>
VariationReport variation_rhs(const M& mesh, const GeometryState<M>& state,
                              const WeightField& phi, const EigenPair& eig, const SpeedLaw& law)
{
    return variation_rhs(mesh, state, phi, eig, speed(state, law));
}

/// Evolve observer: solves for the first eigenpair (continuing from the previous
/// Ritz block) and records the variation quadrature.
template <DiscreteHypersurface M>
class SpectralObserver {
public:
    SpectralObserver(WeightField phi, EigenOptions options = {})
        : phi_(std::move(phi))
        , options_(options)
    {
    }

    void operator()(const M& mesh, const GeometryState<M>& state, const std::vector<double>& s,
                    TraceRow& row)
    {
        EigenOptions opts = options_;
        opts.warm_start = basis_ ? &*basis_ : nullptr;
        const auto ops = assemble(mesh, state, phi_);
        auto eig = first_eigenpair(ops, opts);
        const auto var = variation_rhs(mesh, state, phi_, eig, s);
        SpectralSample sample;
        sample.lambda = eig.lambda;
        sample.residual = eig.residual;
        sample.iterations = eig.iterations;
        sample.term_rayleigh = var.term_rayleigh;
        sample.term_shape = var.term_shape;
        sample.term_area = var.term_area;
        sample.rhs_variation = var.rhs_general;
        row.spectral = sample;
        basis_ = std::move(eig.basis);
        eig.basis.resize(0, 0);
        last_ = std::move(eig);
    }

    /// Most recent eigenpair (without its Ritz block).
    const std::optional<EigenPair>& last() const noexcept { return last_; }

private:
    WeightField phi_;
    EigenOptions options_;
    std::optional<Eigen::MatrixXd> basis_;
    std::optional<EigenPair> last_;
};

namespace detail {

/// Derivative at t of the quadratic through three samples.
inline double quadratic_slope(const std::array<double, 3>& ts, const std::array<double, 3>& ys,
                              double t)
{
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        double denom = 1.0;
        double num = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j == i) {
                continue;
            }
            denom *= ts[i] - ts[j];
            const int k = 3 - i - j;
            num += t - ts[k];
        }
        d += ys[i] * num / denom;
    }
    return d;
}

/// Finite-difference derivative of a sampled series: the derivative of the
/// quadratic through the three samples centred on the one nearest to t
/// (one-sided at the ends, second order throughout).
inline double sampled_derivative(const std::vector<double>& ts, const std::vector<double>& ys,
                                 double t)
{
    const Index m = ts.size();
    if (m < 2) {
        throw DomainError("need at least two samples for a finite difference");
    }
    const double slack = 1e-12 * std::max(1.0, std::abs(ts.back()));
    if (t < ts.front() - slack || t > ts.back() + slack) {
        throw DomainError("time outside the sampled trace");
    }
    if (m == 2) {
        return (ys[1] - ys[0]) / (ts[1] - ts[0]);
    }
    Index nearest = 0;
    for (Index i = 1; i < m; ++i) {
        if (std::abs(ts[i] - t) < std::abs(ts[nearest] - t)) {
            nearest = i;
        }
    }
    const Index c = std::clamp<Index>(nearest, 1, m - 2);
    return quadratic_slope({ts[c - 1], ts[c], ts[c + 1]}, {ys[c - 1], ys[c], ys[c + 1]}, t);
}

} // namespace detail

/// Finite-difference dlambda/dt from the trace's own spectral samples.
inline double fd_lambda_dot(const FlowTrace& trace, double t)
{
    std::vector<double> ts;
    std::vector<double> ls;
    for (const auto* r : trace.spectral_rows()) {
        ts.push_back(r->t);
        ls.push_back(r->spectral->lambda);
    }
    return detail::sampled_derivative(ts, ls, t);
}

/// Result of a theorem or identity check. Hypothesis and conclusion are kept
/// apart: a failed hypothesis makes the check vacuous, not failed.
struct Verdict {
    std::string theorem;
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    double max_violation = 0.0;
    std::size_t samples = 0;
    std::map<std::string, double> details;

    bool passed() const { return !hypothesis_holds || conclusion_holds; }
};

/// Per-sample monotonicity tolerance relative to lambda(0).
inline constexpr double kMonotoneTolerance = 1e-6;
/// Half-pinching and umbilicity tolerance for discrete curvatures.
inline constexpr double kPinchingTolerance = 2e-2;

namespace detail {

/// Largest drop between consecutive values (0 if the series never decreases).
inline double max_decrease(const std::vector<double>& ys)
{
    double worst = 0.0;
    for (Index i = 1; i < ys.size(); ++i) {
        worst = std::max(worst, ys[i - 1] - ys[i]);
    }
    return worst;
}

inline std::vector<double> lambda_series(const FlowTrace& trace)
{
    std::vector<double> out;
    for (const auto* r : trace.spectral_rows()) {
        out.push_back(r->spectral->lambda);
    }
    return out;
}

inline void require_spectral(const FlowTrace& trace)
{
    if (trace.rows.empty() || !trace.rows.front().spectral) {
        throw Error("trace carries no spectral sample at t = 0");
    }
}

} // namespace detail

/// Pinched convex data (H > 0, h >= eps H g with eps >= 1/2) under unnormalized
/// mean curvature flow: lambda must be nondecreasing.
inline Verdict check_theorem_tt1(const FlowTrace& trace)
{
    if (trace.law.kind != SpeedLaw::Kind::UnnormalizedMcf) {
        throw Error("tt1 needs a trace of the unnormalized mean curvature flow");
    }
    detail::require_spectral(trace);
    Verdict v;
    v.theorem = "tt1";
    const auto& r0 = trace.rows.front();
    v.hypothesis_holds =
        r0.h_min > 0.0 && std::isfinite(r0.eps_star) && r0.eps_star >= 0.5 - kPinchingTolerance;
    const auto lambda = detail::lambda_series(trace);
    v.samples = lambda.size();
    v.max_violation = detail::max_decrease(lambda);
    const double tol = kMonotoneTolerance * lambda.front();
    v.conclusion_holds = v.max_violation <= tol;
    v.details["eps_star_initial"] = r0.eps_star;
    v.details["lambda_initial"] = lambda.front();
    v.details["lambda_final"] = lambda.back();
    v.details["tolerance"] = tol;
    return v;
}

/// Power-flow check: discrete umbilicity a_i = kappa_i / H must persist and
/// lambda must be nondecreasing.
inline Verdict check_theorem_hk(const FlowTrace& trace, double spread_tolerance = 1e-2)
{
    if (trace.law.kind != SpeedLaw::Kind::Power) {
        throw Error("hk needs a trace of the power flow");
    }
    detail::require_spectral(trace);
    Verdict v;
    v.theorem = "hk";
    const auto& r0 = trace.rows.front();
    const double inv_n = 1.0 / trace.dim;
    // a_i = 1/n - O(eps) for every i with sum a_i = 1 forces near-umbilicity.
    v.hypothesis_holds = r0.h_min > 0.0 && std::isfinite(r0.a_spread) &&
                         std::abs(r0.eps_star - inv_n) <= kPinchingTolerance &&
                         r0.a_spread <= kPinchingTolerance;

    double spread_max = r0.a_spread;
    bool spread_ok = true;
    for (const auto& r : trace.rows) {
        if (!std::isfinite(r.a_spread)) {
            spread_ok = false;
            continue;
        }
        spread_max = std::max(spread_max, r.a_spread);
    }
    const double spread_excess = spread_max - r0.a_spread;
    spread_ok = spread_ok && spread_excess <= spread_tolerance;

    const auto lambda = detail::lambda_series(trace);
    v.samples = lambda.size();
    const double decrease = detail::max_decrease(lambda);
    const double tol = kMonotoneTolerance * lambda.front();
    v.conclusion_holds = spread_ok && decrease <= tol;
    v.max_violation = decrease;
    v.details["spread_initial"] = r0.a_spread;
    v.details["spread_excess"] = spread_excess;
    v.details["spread_tolerance"] = spread_tolerance;
    v.details["spread_max"] = spread_max;
    v.details["lambda_max_decrease"] = decrease;
    v.details["tolerance"] = tol;
    return v;
}

/// Exponent variant for the nonincreasing quantity: the text's
/// (phi_hi - psi + 2 phi_hi), or the (phi_hi - psi + 2 eps phi_hi) reading that
/// mirrors the nondecreasing one.
enum class DownExponent { AsWritten, Symmetric };

struct MonotoneQuantities {
    double t = 0.0;
    double psi = 0.0;
    double phi_hi = 0.0;
    double lambda = 0.0;
    double q_up = 0.0;
    double q_down = 0.0;
};

struct MonotoneSeries {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double eps = 0.0;
    /// C1 e^{-C2 t} <= H_min(t) and H_max(t) <= C3 at every trace row.
    bool bounds_hold = false;
    std::vector<MonotoneQuantities> samples;
};

/// Fit C1, C2, C3 from the trace and build Q_up, Q_down at the spectral samples.
/// The time integrals use the trapezoid rule over every trace row.
inline MonotoneSeries monotone_quantities(const FlowTrace& trace,
                                          DownExponent variant = DownExponent::AsWritten)
{
    if (trace.law.kind != SpeedLaw::Kind::SquaredVolumePreserving) {
        throw Error("monotone quantities need the squared volume-preserving flow");
    }
    detail::require_spectral(trace);
    const auto& rows = trace.rows;
    MonotoneSeries out;
    out.c1 = rows.front().h_min;
    if (!(out.c1 > 0.0)) {
        throw Error("initial H_min must be positive");
    }
    out.eps = rows.front().eps_star;
    out.c3 = rows.front().h_max;
    for (const auto& r : rows) {
        out.c3 = std::max(out.c3, r.h_max);
        if (r.t > 0.0) {
            if (!(r.h_min > 0.0)) {
                throw Error("H_min became nonpositive along the trace");
            }
            out.c2 = std::max(out.c2, std::log(out.c1 / r.h_min) / r.t);
        }
    }
    out.bounds_hold = true;
    for (const auto& r : rows) {
        const double lower = out.c1 * std::exp(-out.c2 * r.t);
        if (lower > r.h_min * (1.0 + 1e-12) || r.h_max > out.c3) {
            out.bounds_hold = false;
        }
    }

    auto psi = [&](const TraceRow& r) {
        const double lower = out.c1 * std::exp(-out.c2 * r.t);
        return (lower * lower - r.r_tilde) * lower;
    };
    auto phi_hi = [&](const TraceRow& r) { return (out.c3 * out.c3 - r.r_tilde) * out.c3; };
    auto up_rate = [&](const TraceRow& r) {
        return psi(r) - phi_hi(r) + 2.0 * out.eps * psi(r);
    };
    auto down_rate = [&](const TraceRow& r) {
        const double extra = variant == DownExponent::AsWritten ? 2.0 : 2.0 * out.eps;
        return phi_hi(r) - psi(r) + extra * phi_hi(r);
    };

    double up_integral = 0.0;
    double down_integral = 0.0;
    for (Index i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            const double dt = rows[i].t - rows[i - 1].t;
            up_integral += 0.5 * dt * (up_rate(rows[i]) + up_rate(rows[i - 1]));
            down_integral += 0.5 * dt * (down_rate(rows[i]) + down_rate(rows[i - 1]));
        }
        if (rows[i].spectral) {
            MonotoneQuantities q;
            q.t = rows[i].t;
            q.psi = psi(rows[i]);
            q.phi_hi = phi_hi(rows[i]);
            q.lambda = rows[i].spectral->lambda;
            q.q_up = std::exp(-up_integral) * q.lambda;
            q.q_down = std::exp(-down_integral) * q.lambda;
            out.samples.push_back(q);
        }
    }
    return out;
}

/// Copy Q_up / Q_down into the trace rows so they appear in the CSV.
inline void attach_monotone_quantities(FlowTrace& trace, const MonotoneSeries& series)
{
    Index k = 0;
    for (auto& r : trace.rows) {
        if (r.spectral && k < series.samples.size()) {
            r.q_up = series.samples[k].q_up;
            r.q_down = series.samples[k].q_down;
            ++k;
        }
    }
}

inline Verdict check_theorem_psi_phi(const FlowTrace& trace,
                                     DownExponent variant = DownExponent::AsWritten)
{
    Verdict v;
    v.theorem = "psi-phi";
    const auto& r0 = trace.rows.front();
    v.hypothesis_holds = r0.h_min > 0.0 && std::isfinite(r0.eps_star) && r0.eps_star >= 0.0;
    if (!v.hypothesis_holds) {
        return v;
    }
    const auto series = monotone_quantities(trace, variant);
    std::vector<double> up;
    std::vector<double> down_negated;
    bool ordered = series.c1 <= series.c3;
    for (const auto& q : series.samples) {
        up.push_back(q.q_up);
        down_negated.push_back(-q.q_down);
        ordered = ordered && q.psi <= q.phi_hi;
    }
    const double tol = kMonotoneTolerance * series.samples.front().lambda;
    const double up_violation = detail::max_decrease(up);
    const double down_violation = detail::max_decrease(down_negated);
    v.samples = series.samples.size();
    v.max_violation = std::max(up_violation, down_violation);
    v.conclusion_holds = series.bounds_hold && ordered && v.max_violation <= tol;
    v.details["C1"] = series.c1;
    v.details["C2"] = series.c2;
    v.details["C3"] = series.c3;
    v.details["eps"] = series.eps;
    v.details["q_up_max_decrease"] = up_violation;
    v.details["q_down_max_increase"] = down_violation;
    v.details["bounds_hold"] = series.bounds_hold ? 1.0 : 0.0;
    v.details["tolerance"] = tol;
    return v;
}

/// Relative disagreement between the variation quadrature and the finite
/// difference of lambda at every interior spectral sample.
struct VariationComparison {
    std::vector<VariationReport> reports;
    double max_relative_error = 0.0;
};

/// `floor` guards the denominator max(|fd|, floor) for near-stationary traces.
inline VariationComparison compare_variation(const FlowTrace& trace, double floor = 0.0)
{
    const auto rows = trace.spectral_rows();
    if (rows.size() < 3) {
        throw Error("variation check needs at least three spectral samples");
    }
    VariationComparison out;
    for (Index i = 1; i + 1 < rows.size(); ++i) {
        VariationReport r;
        r.t = rows[i]->t;
        r.term_rayleigh = rows[i]->spectral->term_rayleigh;
        r.term_shape = rows[i]->spectral->term_shape;
        r.term_area = rows[i]->spectral->term_area;
        r.rhs_general = rows[i]->spectral->rhs_variation;
        r.fd_lambda_dot = fd_lambda_dot(trace, r.t);
        r.relative_error =
            std::abs(r.rhs_general - r.fd_lambda_dot) / std::max(std::abs(r.fd_lambda_dot), floor);
        out.max_relative_error = std::max(out.max_relative_error, r.relative_error);
        out.reports.push_back(r);
    }
    return out;
}

inline Verdict check_variation(const FlowTrace& trace, double tolerance = 0.05, double floor = 0.0)
{
    const auto cmp = compare_variation(trace, floor);
    Verdict v;
    v.theorem = "variation";
    v.hypothesis_holds = true;
    v.samples = cmp.reports.size();
    v.max_violation = cmp.max_relative_error;
    v.conclusion_holds = cmp.max_relative_error <= tolerance;
    v.details["max_relative_error"] = cmp.max_relative_error;
    v.details["tolerance"] = tolerance;
    return v;
}

/// Area evolution d|M|/dt = -int S H dA: centred finite difference of the area
/// column against the recorded quadrature, at every interior row. `floor` guards
/// the denominator as in compare_variation.
inline double area_identity_error(const FlowTrace& trace, double floor = 0.0)
{
    const auto& rows = trace.rows;
    if (rows.size() < 3) {
        throw Error("area identity needs at least three rows");
    }
    std::vector<double> ts;
    std::vector<double> as;
    for (const auto& r : rows) {
        ts.push_back(r.t);
        as.push_back(r.area);
    }
    double worst = 0.0;
    for (Index i = 1; i + 1 < rows.size(); ++i) {
        const double fd = detail::quadratic_slope({ts[i - 1], ts[i], ts[i + 1]},
                                                  {as[i - 1], as[i], as[i + 1]}, ts[i]);
        const double rate = rows[i].area_rate;
        const double den = std::max({std::abs(rate), std::abs(fd), floor, 1e-300});
        worst = std::max(worst, std::abs(fd - rate) / den);
    }
    return worst;
}

/// Metric evolution dg/dt = -2 S h: per edge, the one-step change of the squared
/// length against -2 S h(e, e) with S and h averaged over the edge ends.
/// Returns the relative l2 error over all edges.
template <DiscreteHypersurface M>
double metric_identity_error(const M& mesh, const SpeedLaw& law, double dt)
{
    const auto state = geometry_state(mesh);
    const auto s = speed(state, law);
    const M next = step(mesh, state, s, dt);
    const auto& x0 = mesh.vertices();
    const auto& x1 = next.vertices();
    double err2 = 0.0;
    double ref2 = 0.0;
    for (const auto& [i, j] : mesh.topology().edges) {
        const typename M::Point e = x0[j] - x0[i];
        const double fd = ((x1[j] - x1[i]).squaredNorm() - e.squaredNorm()) / dt;
        const auto h_mid = 0.5 * (state.shape_operator[i] + state.shape_operator[j]);
        const double model = -2.0 * 0.5 * (s[i] + s[j]) * e.dot(h_mid * e);
        err2 += (fd - model) * (fd - model);
        ref2 += model * model;
    }
    return std::sqrt(err2 / ref2);
}

/// Scaling form of the metric-comparison continuity estimate: for g2 = c g1 with
/// (1+eps)^{-1} <= c <= 1+eps,
///   lambda(g2) - lambda(g1) <= ((1+eps)^{n/2+1} - (1+eps)^{-n/2}) (1+eps)^{n/2} lambda(g1).
/// g2 is realized by scaling vertex positions by sqrt(c).
template <DiscreteHypersurface M>
Verdict check_metric_comparison(const M& mesh, const WeightField& phi,
                                const std::vector<double>& eps_values = {0.05, 0.1, 0.3},
                                const EigenOptions& options = {})
{
    constexpr double n = M::dim;
    Verdict v;
    v.theorem = "metric-cmp";
    v.hypothesis_holds = true;
    v.conclusion_holds = true;
    v.max_violation = -std::numeric_limits<double>::infinity();
    const double lambda1 = first_eigenpair(assemble(mesh, phi), options).lambda;
    v.details["lambda"] = lambda1;
    for (double eps : eps_values) {
        const double a = 1.0 + eps;
        const double bound =
            (std::pow(a, n / 2.0 + 1.0) - std::pow(a, -n / 2.0)) * std::pow(a, n / 2.0) * lambda1;
        for (double c : {1.0 / a, 1.0 / std::sqrt(a), std::sqrt(a), a}) {
            const M scaled_mesh = scaled(mesh, std::sqrt(c));
            const double lambda2 = first_eigenpair(assemble(scaled_mesh, phi), options).lambda;
            const double excess = (lambda2 - lambda1) - bound;
            v.max_violation = std::max(v.max_violation, excess);
            v.conclusion_holds = v.conclusion_holds && excess <= 1e-12 * lambda1;
            ++v.samples;
            // lambda(c g) = lambda(g) / c
            v.details["scaling_error_max"] =
                std::max(v.details["scaling_error_max"], std::abs(lambda2 * c - lambda1) / lambda1);
        }
    }
    return v;
}

} // namespace flowspectra
