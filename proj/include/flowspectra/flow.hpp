#pragma once

#include "flowspectra/geometry.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace flowspectra {

/// Normal speed S of the flow dF/dt = -S nu.
struct SpeedLaw {
    enum class Kind {
        UnnormalizedMcf,         ///< S = H
        VolumePreservingMcf,     ///< S = H - r(t), r = area-mean of H
        Power,                   ///< S = H^k
        SquaredVolumePreserving, ///< S = H^2 - r~(t), r~ = area-mean of H^2
    };

    Kind kind = Kind::UnnormalizedMcf;
    int k = 1;

    static SpeedLaw mcf() { return {Kind::UnnormalizedMcf, 1}; }
    static SpeedLaw volume_preserving() { return {Kind::VolumePreservingMcf, 1}; }
    static SpeedLaw squared_volume_preserving() { return {Kind::SquaredVolumePreserving, 2}; }
    static SpeedLaw power(int k)
    {
        if (k < 1) {
            throw Error("power flow exponent must be >= 1");
        }
        return {Kind::Power, k};
    }

    /// Homogeneity degree of S in the curvatures.
    int homogeneity() const
    {
        switch (kind) {
        case Kind::Power:
            return k;
        case Kind::SquaredVolumePreserving:
            return 2;
        default:
            return 1;
        }
    }

    std::string name() const
    {
        switch (kind) {
        case Kind::UnnormalizedMcf:
            return "mcf";
        case Kind::VolumePreservingMcf:
            return "volume_preserving";
        case Kind::Power:
            return "power" + std::to_string(k);
        case Kind::SquaredVolumePreserving:
            return "squared_volume_preserving";
        }
        return "unknown";
    }

    friend bool operator==(const SpeedLaw&, const SpeedLaw&) = default;
};

namespace detail {

inline double ipow(double x, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) {
        r *= x;
    }
    return r;
}

} // namespace detail

/// Unweighted area mean of H^power.
template <DiscreteHypersurface M>
double area_mean_curvature_power(const GeometryState<M>& state, int power)
{
    double num = 0.0;
    double den = 0.0;
    for (Index v = 0; v < state.size(); ++v) {
        num += state.dual_area[v] * detail::ipow(state.mean_curvature[v], power);
        den += state.dual_area[v];
    }
    return num / den;
}

template <DiscreteHypersurface M>
std::vector<double> speed(const GeometryState<M>& state, const SpeedLaw& law)
{
    const auto& h = state.mean_curvature;
    std::vector<double> s(h.size());
    switch (law.kind) {
    case SpeedLaw::Kind::UnnormalizedMcf:
        s = h;
        break;
    case SpeedLaw::Kind::VolumePreservingMcf: {
        const double r = area_mean_curvature_power(state, 1);
        for (Index v = 0; v < s.size(); ++v) {
            s[v] = h[v] - r;
        }
        break;
    }
    case SpeedLaw::Kind::Power:
        for (Index v = 0; v < s.size(); ++v) {
            s[v] = detail::ipow(h[v], law.k);
        }
        break;
    case SpeedLaw::Kind::SquaredVolumePreserving: {
        const double r = area_mean_curvature_power(state, 2);
        for (Index v = 0; v < s.size(); ++v) {
            s[v] = h[v] * h[v] - r;
        }
        break;
    }
    }
    return s;
}

namespace detail {

inline void check_step(const CurveMesh& before, const CurveMesh& after)
{
    const auto& x0 = before.vertices();
    const auto& x1 = after.vertices();
    const double floor = before.topology().measure_floor;
    for (const auto& [i, j] : before.elements()) {
        const Eigen::Vector2d d0 = x0[j] - x0[i];
        const Eigen::Vector2d d1 = x1[j] - x1[i];
        if (!(d1.norm() > floor)) {
            throw StepRejected("segment vanished", i);
        }
        if (!(d0.dot(d1) > 0.0)) {
            throw StepRejected("segment flipped", i);
        }
    }
    if (!(after.enclosed_area() > 0.0)) {
        throw StepRejected("curve lost positive orientation");
    }
}

inline void check_step(const SurfaceMesh& before, const SurfaceMesh& after)
{
    const double floor = before.topology().measure_floor;
    for (Index t = 0; t < before.elements().size(); ++t) {
        const Eigen::Vector3d n0 = before.triangle_normal(t);
        const Eigen::Vector3d n1 = after.triangle_normal(t);
        if (!(0.5 * n1.norm() > floor)) {
            throw StepRejected("triangle vanished", t);
        }
        if (!(n0.dot(n1) > 0.0)) {
            throw StepRejected("triangle flipped", t);
        }
    }
    if (!(after.enclosed_volume() > 0.0)) {
        throw StepRejected("surface lost positive volume");
    }
}

} // namespace detail

/// Forward Euler update F <- F - dt S nu with precomputed geometry and speed.
template <DiscreteHypersurface M>
M step(const M& mesh, const GeometryState<M>& state, const std::vector<double>& s, double dt)
{
    if (!(dt > 0.0)) {
        throw Error("time step must be positive");
    }
    auto pos = mesh.vertices();
    for (Index v = 0; v < pos.size(); ++v) {
        pos[v] -= dt * s[v] * state.normal[v];
    }
    M next = mesh.with_positions(std::move(pos));
    detail::check_step(mesh, next);
    return next;
}

template <DiscreteHypersurface M>
M step(const M& mesh, const SpeedLaw& law, double dt)
{
    const auto state = geometry_state(mesh);
    return step(mesh, state, speed(state, law), dt);
}

/// Explicit step size:
///   dt = cfl h_min^2 / (n gamma max(max|S| L, gamma max|H|^(gamma-1)))
/// with L the characteristic radius (the distance scale that makes |S| L carry
/// the units of the diffusivity term) and n the mesh dimension. The lumped
/// cotangent operator has spectral radius at most 4n / h_min^2, so forward Euler
/// is stable for cfl <= 1/2 in both dimensions. Zero speed falls back to
/// cfl h_min^2 / n.
template <DiscreteHypersurface M>
double adaptive_dt(const M& mesh, const GeometryState<M>& state, const std::vector<double>& s,
                   const SpeedLaw& law, double cfl)
{
    if (!(cfl > 0.0 && cfl <= 1.0)) {
        throw Error("cfl must lie in (0, 1]");
    }
    const double h = min_edge_length(mesh);
    double max_s = 0.0;
    for (double x : s) {
        max_s = std::max(max_s, std::abs(x));
    }
    if (max_s == 0.0) {
        return cfl * h * h / M::dim;
    }
    const int gamma = law.homogeneity();
    double max_h = 0.0;
    for (double x : state.mean_curvature) {
        max_h = std::max(max_h, std::abs(x));
    }
    const double diffusivity = gamma * detail::ipow(max_h, gamma - 1);
    const double advective = max_s * characteristic_radius(mesh);
    return cfl * h * h / (M::dim * gamma * std::max(advective, diffusivity));
}

template <DiscreteHypersurface M>
double adaptive_dt(const M& mesh, const SpeedLaw& law, double cfl)
{
    const auto state = geometry_state(mesh);
    return adaptive_dt(mesh, state, speed(state, law), law, cfl);
}

/// Spectral data attached to a sampled trace row.
struct SpectralSample {
    double lambda = 0.0;
    double rhs_variation = 0.0;
    double term_rayleigh = 0.0;
    double term_shape = 0.0;
    double term_area = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// State summary at one time level. `dt` is the step taken from this row
/// (0 on the last row).
struct TraceRow {
    double t = 0.0;
    double dt = 0.0;
    double area = 0.0;
    double volume = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    /// Area-weighted mean of H.
    double h_mean = 0.0;
    /// Area-weighted mean of H^2.
    double r_tilde = 0.0;
    /// -integral of S H over unweighted area.
    double area_rate = 0.0;
    /// NaN when H <= 0 somewhere.
    double eps_star = std::numeric_limits<double>::quiet_NaN();
    double a_spread = std::numeric_limits<double>::quiet_NaN();
    std::optional<SpectralSample> spectral;
    std::optional<double> q_up;
    std::optional<double> q_down;
};

struct FlowTrace {
    SpeedLaw law;
    int dim = 0;
    double initial_scale = 0.0;
    std::vector<TraceRow> rows;
    bool truncated = false;
    std::string reason;

    /// Rows carrying spectral data, in time order.
    std::vector<const TraceRow*> spectral_rows() const
    {
        std::vector<const TraceRow*> out;
        for (const auto& r : rows) {
            if (r.spectral) {
                out.push_back(&r);
            }
        }
        return out;
    }
};

struct EvolveOptions {
    double t_end = 0.0;
    double cfl = 0.5;
    /// Observer runs every `cadence` steps, and always on the first and last row.
    int cadence = 1;
    /// Stop once max|H| >= factor / initial characteristic radius.
    double curvature_ceiling_factor = 50.0;
    double dt_floor = 1e-10;
    /// Stop once h_min / L falls below this fraction of its initial value.
    /// Pure normal motion lets vertices drift together near a singularity.
    double edge_ratio_floor = 0.25;
    std::uint64_t max_steps = 50'000'000;
};

template <DiscreteHypersurface M>
using Observer =
    std::function<void(const M&, const GeometryState<M>&, const std::vector<double>&, TraceRow&)>;

template <DiscreteHypersurface M>
TraceRow summarize(const GeometryState<M>& state, const std::vector<double>& s, double t)
{
    TraceRow row;
    row.t = t;
    row.area = state.total_area;
    row.volume = state.volume;
    const auto [lo, hi] =
        std::minmax_element(state.mean_curvature.begin(), state.mean_curvature.end());
    row.h_min = *lo;
    row.h_max = *hi;
    row.h_mean = area_mean_curvature_power(state, 1);
    row.r_tilde = area_mean_curvature_power(state, 2);
    double rate = 0.0;
    for (Index v = 0; v < state.size(); ++v) {
        rate -= state.dual_area[v] * s[v] * state.mean_curvature[v];
    }
    row.area_rate = rate;
    const auto pinch = pinching_report(state);
    if (pinch.eps_star) {
        row.eps_star = *pinch.eps_star;
        row.a_spread = pinch.spread;
    }
    return row;
}

/// Integrate the flow up to t_end or the first singularity guard.
template <DiscreteHypersurface M>
FlowTrace evolve(const M& initial, const SpeedLaw& law, const EvolveOptions& options,
                 const Observer<M>& observer = {})
{
    if (!(options.t_end > 0.0)) {
        throw Error("t_end must be positive");
    }
    if (options.cadence < 1) {
        throw Error("observer cadence must be >= 1");
    }
    FlowTrace trace;
    trace.law = law;
    trace.dim = M::dim;
    trace.initial_scale = characteristic_radius(initial);
    const double ceiling = options.curvature_ceiling_factor / trace.initial_scale;
    const double t_eps = 1e-12 * options.t_end;
    const double initial_ratio = min_edge_length(initial) / trace.initial_scale;

    M mesh = initial;
    double t = 0.0;
    for (std::uint64_t n = 0;; ++n) {
        const auto state = geometry_state(mesh);
        const auto s = speed(state, law);
        TraceRow row = summarize(state, s, t);
        const bool sample = (n % static_cast<std::uint64_t>(options.cadence)) == 0;

        auto finish = [&](bool truncated, std::string reason) {
            if (observer) {
                observer(mesh, state, s, row);
            }
            trace.rows.push_back(std::move(row));
            trace.truncated = truncated;
            trace.reason = std::move(reason);
        };

        if (std::max(std::abs(row.h_min), std::abs(row.h_max)) >= ceiling) {
            finish(true, "curvature ceiling reached");
            break;
        }
        if (min_edge_length(mesh) / characteristic_radius(mesh) <
            options.edge_ratio_floor * initial_ratio) {
            finish(true, "mesh resolution lost");
            break;
        }
        if (t >= options.t_end - t_eps) {
            finish(false, "");
            break;
        }
        if (n >= options.max_steps) {
            finish(true, "step limit reached");
            break;
        }
        double dt = adaptive_dt(mesh, state, s, law, options.cfl);
        if (dt < options.dt_floor) {
            finish(true, "time step below floor");
            break;
        }
        dt = std::min(dt, options.t_end - t);
        row.dt = dt;

        M next = mesh;
        try {
            next = step(mesh, state, s, dt);
        } catch (const StepRejected& e) {
            row.dt = 0.0;
            finish(true, std::string("step rejected: ") + e.what());
            break;
        }
        if (sample && observer) {
            observer(mesh, state, s, row);
        }
        trace.rows.push_back(std::move(row));
        mesh = std::move(next);
        t += dt;
    }
    return trace;
}

} // namespace flowspectra
