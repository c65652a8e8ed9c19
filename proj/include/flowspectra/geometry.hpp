#pragma once

#include "flowspectra/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>

namespace flowspectra {

/// Vertex-indexed weight function phi. Lives on the abstract manifold, so it is
/// sampled once and then carried unchanged along a flow.
class WeightField {
public:
    WeightField() = default;

    explicit WeightField(std::vector<double> values)
        : values_(std::move(values))
    {
        for (Index v = 0; v < values_.size(); ++v) {
            if (!std::isfinite(values_[v])) {
                throw GeometryError("weight field value is not finite", v);
            }
        }
    }

    static WeightField constant(Index num_vertices, double value = 0.0)
    {
        return WeightField(std::vector<double>(num_vertices, value));
    }

    /// Evaluate an ambient function at the current vertex positions.
    template <DiscreteHypersurface M>
    static WeightField sample(const M& mesh, const std::function<double(const Eigen::Vector3d&)>& fn)
    {
        std::vector<double> values(mesh.num_vertices());
        for (Index v = 0; v < values.size(); ++v) {
            Eigen::Vector3d p = Eigen::Vector3d::Zero();
            p.head<M::ambient_dim>() = mesh.vertices()[v];
            values[v] = fn(p);
        }
        return WeightField(std::move(values));
    }

    Index size() const noexcept { return values_.size(); }
    double operator[](Index v) const { return values_[v]; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// e^{-phi} at every vertex.
    std::vector<double> density() const
    {
        std::vector<double> d(values_.size());
        for (Index v = 0; v < d.size(); ++v) {
            d[v] = std::exp(-values_[v]);
        }
        return d;
    }

private:
    std::vector<double> values_;
};

/// First- and second-order geometry of a discrete hypersurface.
///
/// Conventions: the normal points outward and the mean curvature is the trace of
/// the shape operator, so a round n-sphere of radius r has H = n / r.
template <DiscreteHypersurface M>
struct GeometryState {
    static constexpr int n = M::dim;
    using Point = typename M::Point;
    using Tensor = Eigen::Matrix<double, M::ambient_dim, M::ambient_dim>;

    std::vector<Point> normal;
    std::vector<double> mean_curvature;
    /// Principal curvatures per vertex, ascending.
    std::vector<std::array<double, n>> principal;
    /// Shape operator as a tangential ambient tensor: h(X, Y) = X^T S Y.
    std::vector<Tensor> shape_operator;
    /// Lumped dual measure, the discrete d(nu): half edge lengths on curves,
    /// mixed Voronoi areas on surfaces. Sums to total_area.
    std::vector<double> dual_area;
    double total_area = 0.0;
    double volume = 0.0;

    Index size() const noexcept { return mean_curvature.size(); }

    /// |A|^2 = sum of squared principal curvatures.
    double second_form_norm2(Index v) const
    {
        double s = 0.0;
        for (double k : principal[v]) {
            s += k * k;
        }
        return s;
    }
};

namespace detail {

inline void check_dual_areas(std::span<const double> w)
{
    for (Index v = 0; v < w.size(); ++v) {
        if (!(w[v] > 0.0)) {
            throw GeometryError("vanishing dual area", v);
        }
    }
}

/// Principal curvatures and directions from a weighted least-squares quadric
/// h = a u^2 + b uv + c v^2 + d u + e v over the 2-ring, in the frame of `nu`.
inline void fit_shape_operator(const SurfaceMesh& mesh, Index v, const Eigen::Vector3d& nu,
                               std::array<double, 2>& kappa, Eigen::Matrix3d& tensor)
{
    const auto& x = mesh.vertices();
    const auto& ring = mesh.topology().two_ring[v];

    Eigen::Vector3d e1;
    {
        Eigen::Index axis;
        nu.cwiseAbs().minCoeff(&axis);
        e1 = nu.cross(Eigen::Vector3d::Unit(axis)).normalized();
    }
    const Eigen::Vector3d e2 = nu.cross(e1);

    double scale = 0.0;
    for (Index w : ring) {
        scale += (x[w] - x[v]).norm();
    }
    scale /= static_cast<double>(ring.size());

    Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> atb = Eigen::Matrix<double, 5, 1>::Zero();
    for (Index w : ring) {
        const Eigen::Vector3d p = (x[w] - x[v]) / scale;
        const double u = p.dot(e1);
        const double s = p.dot(e2);
        Eigen::Matrix<double, 5, 1> row;
        row << u * u, u * s, s * s, u, s;
        ata += row * row.transpose();
        atb += row * p.dot(nu);
    }
    const Eigen::Matrix<double, 5, 1> c = ata.ldlt().solve(atb);
    const double a = c[0] / scale;
    const double b = c[1] / scale;
    const double cc = c[2] / scale;
    const double du = c[3];
    const double dv = c[4];

    Eigen::Matrix2d first;
    first << 1.0 + du * du, du * dv, du * dv, 1.0 + dv * dv;
    Eigen::Matrix2d second;
    second << 2.0 * a, b, b, 2.0 * cc;
    // Outward normal: a convex cap bends away from nu, so negate the Hessian.
    second *= -1.0 / std::sqrt(1.0 + du * du + dv * dv);

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(second, first);
    const Eigen::Vector2d k = es.eigenvalues();
    const Eigen::Matrix2d dirs = es.eigenvectors();
    kappa = {k[0], k[1]};

    Eigen::Vector3d t1 = (e1 * dirs(0, 0) + e2 * dirs(1, 0)).normalized();
    Eigen::Vector3d t2 = nu.cross(t1);
    tensor = k[0] * t1 * t1.transpose() + k[1] * t2 * t2.transpose();
}

} // namespace detail

/// Curves: turning angle over dual length, normal along the vertex bisector.
inline GeometryState<CurveMesh> geometry_state(const CurveMesh& mesh)
{
    const auto& x = mesh.vertices();
    const Index n = x.size();
    GeometryState<CurveMesh> g;
    g.normal.resize(n);
    g.mean_curvature.resize(n);
    g.principal.resize(n);
    g.shape_operator.resize(n);
    g.dual_area.assign(n, 0.0);

    std::vector<Eigen::Vector2d> tangent(n);
    std::vector<double> length(n);
    for (Index i = 0; i < n; ++i) {
        const Eigen::Vector2d d = x[(i + 1) % n] - x[i];
        length[i] = d.norm();
        if (!(length[i] > 0.0)) {
            throw GeometryError("zero-length segment", i);
        }
        tangent[i] = d / length[i];
        g.total_area += length[i];
    }
    for (Index v = 0; v < n; ++v) {
        const Index prev = (v + n - 1) % n;
        g.dual_area[v] = 0.5 * (length[prev] + length[v]);
        const Eigen::Vector2d& tin = tangent[prev];
        const Eigen::Vector2d& tout = tangent[v];
        const double turning = std::atan2(detail::cross2(tin, tout), tin.dot(tout));
        // Outward normal of a counter-clockwise segment with tangent t is (t.y, -t.x).
        Eigen::Vector2d nu(tin.y() + tout.y(), -tin.x() - tout.x());
        const double len = nu.norm();
        if (!(len > 1e-12)) {
            throw GeometryError("curve folds back on itself", v);
        }
        nu /= len;
        g.normal[v] = nu;
        const double k = turning / g.dual_area[v];
        g.mean_curvature[v] = k;
        g.principal[v] = {k};
        const Eigen::Vector2d tau(-nu.y(), nu.x());
        g.shape_operator[v] = k * tau * tau.transpose();
    }
    detail::check_dual_areas(g.dual_area);
    g.volume = mesh.enclosed_area();
    return g;
}

/// Surfaces: H and normal from the cotangent Laplacian of the position
/// (K x = w H nu), principal curvatures from a 2-ring quadric fit whose trace
/// is reconciled with H.
inline GeometryState<SurfaceMesh> geometry_state(const SurfaceMesh& mesh)
{
    const auto& x = mesh.vertices();
    const auto& tris = mesh.elements();
    const Index n = x.size();
    GeometryState<SurfaceMesh> g;
    g.normal.resize(n);
    g.mean_curvature.resize(n);
    g.principal.resize(n);
    g.shape_operator.resize(n);
    g.dual_area.assign(n, 0.0);

    std::vector<Eigen::Vector3d> lap(n, Eigen::Vector3d::Zero());
    std::vector<Eigen::Vector3d> face_normal_sum(n, Eigen::Vector3d::Zero());
    for (Index t = 0; t < tris.size(); ++t) {
        const auto& tri = tris[t];
        const Eigen::Vector3d nrm = mesh.triangle_normal(t);
        const double dbl_area = nrm.norm();
        if (!(dbl_area > 0.0)) {
            throw GeometryError("degenerate triangle at vertex", tri[0]);
        }
        g.total_area += 0.5 * dbl_area;
        std::array<double, 3> cot;
        int obtuse = -1;
        for (int a = 0; a < 3; ++a) {
            const Index i = tri[a];
            const Index j = tri[(a + 1) % 3];
            const Index k = tri[(a + 2) % 3];
            const double dot = (x[j] - x[i]).dot(x[k] - x[i]);
            cot[a] = dot / dbl_area;
            if (dot < 0.0) {
                obtuse = a;
            }
        }
        for (int a = 0; a < 3; ++a) {
            const Index i = tri[a];
            const Index j = tri[(a + 1) % 3];
            const Index k = tri[(a + 2) % 3];
            face_normal_sum[i] += nrm;
            // cot[a] belongs to the angle at i, opposite edge (j, k)
            lap[j] += 0.5 * cot[a] * (x[j] - x[k]);
            lap[k] += 0.5 * cot[a] * (x[k] - x[j]);
            // mixed Voronoi area
            if (obtuse < 0) {
                g.dual_area[i] += ((x[j] - x[i]).squaredNorm() * cot[(a + 2) % 3] +
                                   (x[k] - x[i]).squaredNorm() * cot[(a + 1) % 3]) /
                                  8.0;
            } else {
                g.dual_area[i] += dbl_area / (obtuse == a ? 4.0 : 8.0);
            }
        }
    }
    detail::check_dual_areas(g.dual_area);

    for (Index v = 0; v < n; ++v) {
        const Eigen::Vector3d hn = lap[v] / g.dual_area[v];
        const Eigen::Vector3d nf = face_normal_sum[v].normalized();
        const double hn_norm = hn.norm();
        const double along = hn.dot(nf);
        if (hn_norm > 0.0 && std::abs(along) >= 0.5 * hn_norm) {
            const double sign = along > 0.0 ? 1.0 : -1.0;
            g.normal[v] = sign * hn / hn_norm;
            g.mean_curvature[v] = sign * hn_norm;
        } else {
            // Near-flat or saddle-balanced vertex: the curvature vector has no
            // reliable direction, fall back to the face normal.
            g.normal[v] = nf;
            g.mean_curvature[v] = along;
        }

        std::array<double, 2> kappa;
        Eigen::Matrix3d tensor;
        detail::fit_shape_operator(mesh, v, g.normal[v], kappa, tensor);
        const double trace = kappa[0] + kappa[1];
        const double h = g.mean_curvature[v];
        if (trace * h > 0.0 && h / trace >= 0.5 && h / trace <= 2.0) {
            const double s = h / trace;
            kappa = {kappa[0] * s, kappa[1] * s};
            tensor *= s;
        } else {
            const double shift = 0.5 * (h - trace);
            kappa = {kappa[0] + shift, kappa[1] + shift};
            const Eigen::Matrix3d proj =
                Eigen::Matrix3d::Identity() - g.normal[v] * g.normal[v].transpose();
            tensor += shift * proj;
        }
        g.principal[v] = kappa;
        g.shape_operator[v] = tensor;
    }
    g.volume = mesh.enclosed_volume();
    return g;
}

/// Weighted measure mu_v = e^{-phi_v} w_v with its total.
struct WeightedMeasure {
    std::vector<double> mu;
    double total = 0.0;
};

template <DiscreteHypersurface M>
WeightedMeasure weighted_measure(const GeometryState<M>& state, const WeightField& phi)
{
    if (phi.size() != state.size()) {
        throw GeometryError("weight field size does not match mesh");
    }
    WeightedMeasure out;
    out.mu.resize(state.size());
    for (Index v = 0; v < state.size(); ++v) {
        out.mu[v] = std::exp(-phi[v]) * state.dual_area[v];
        out.total += out.mu[v];
    }
    return out;
}

/// Pinching of the second fundamental form relative to H.
struct PinchingReport {
    bool h_positive = false;
    /// min over vertices of kappa_min / H; empty when H <= 0 somewhere.
    std::optional<double> eps_star;
    /// a_i = kappa_i / H per vertex (row) and index (column).
    Eigen::MatrixXd ratios;
    double ratio_min = 0.0;
    double ratio_max = 0.0;
    /// max - min over all vertices and indices of a_i.
    double spread = 0.0;
    bool satisfies_half = false;
};

/// Round spheres sit exactly on eps* = 1/2, so the half-pinching flag accepts
/// eps* >= 1/2 - tolerance to absorb discretization noise.
template <DiscreteHypersurface M>
PinchingReport pinching_report(const GeometryState<M>& state, double tolerance = 2e-2)
{
    constexpr int n = M::dim;
    PinchingReport r;
    r.h_positive = std::all_of(state.mean_curvature.begin(), state.mean_curvature.end(),
                               [](double h) { return h > 0.0; });
    r.ratios.resize(static_cast<Eigen::Index>(state.size()), n);
    if (!r.h_positive) {
        r.ratios.setConstant(std::numeric_limits<double>::quiet_NaN());
        return r;
    }
    for (Index v = 0; v < state.size(); ++v) {
        for (int i = 0; i < n; ++i) {
            r.ratios(static_cast<Eigen::Index>(v), i) =
                state.principal[v][i] / state.mean_curvature[v];
        }
    }
    r.ratio_min = r.ratios.minCoeff();
    r.ratio_max = r.ratios.maxCoeff();
    r.spread = r.ratio_max - r.ratio_min;
    r.eps_star = r.ratios.col(0).minCoeff();
    r.satisfies_half = *r.eps_star >= 0.5 - tolerance;
    return r;
}

} // namespace flowspectra
