#pragma once

#include "flowspectra/generators.hpp"
#include "flowspectra/geometry.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cstdint>
#include <random>

namespace flowspectra {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Weighted stiffness K (f^T K f = integral |grad f|^2 dmu) and lumped weighted
/// mass M = diag(mu). Together they realize -Delta_phi in weak form.
struct WeightedOperators {
    SparseMatrix stiffness;
    Eigen::VectorXd mass;

    Eigen::Index size() const { return mass.size(); }
};

/// Element coefficients are scaled by the mean of e^{-phi} over the element's
/// corners, which keeps K symmetric with constants in its kernel.
template <DiscreteHypersurface M>
WeightedOperators assemble(const M& mesh, const GeometryState<M>& state, const WeightField& phi)
{
    const Index n = mesh.num_vertices();
    if (phi.size() != n || state.size() != n) {
        throw GeometryError("weight field or geometry does not match mesh");
    }
    detail::check_dual_areas(state.dual_area);
    const auto density = phi.density();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.elements().size() * (M::dim + 1) * (M::dim + 1));
    for (const auto& e : mesh.elements()) {
        double omega = 0.0;
        for (Index v : e) {
            omega += density[v];
        }
        omega /= static_cast<double>(e.size());
        const double w = omega * element_measure(mesh, e);
        const auto grads = basis_gradients(mesh, e);
        for (int a = 0; a <= M::dim; ++a) {
            for (int b = 0; b <= M::dim; ++b) {
                triplets.emplace_back(static_cast<int>(e[a]), static_cast<int>(e[b]),
                                      w * grads[a].dot(grads[b]));
            }
        }
    }
    WeightedOperators ops;
    ops.stiffness.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
    ops.mass.resize(static_cast<Eigen::Index>(n));
    for (Index v = 0; v < n; ++v) {
        ops.mass[static_cast<Eigen::Index>(v)] = density[v] * state.dual_area[v];
    }
    return ops;
}

template <DiscreteHypersurface M>
WeightedOperators assemble(const M& mesh, const WeightField& phi)
{
    return assemble(mesh, geometry_state(mesh), phi);
}

/// First nonzero eigenpair of K f = lambda M f, normalized so that f^T M f = 1,
/// f^T M 1 = 0 and the entry of largest magnitude is positive.
struct EigenPair {
    double lambda = 0.0;
    Eigen::VectorXd f;
    /// ||K f - lambda M f|| / ||K f||
    double residual = 0.0;
    int iterations = 0;
    /// Converged Ritz block, usable as a warm start for a nearby problem.
    Eigen::MatrixXd basis;
};

struct EigenOptions {
    int block_size = 8;
    double tolerance = 1e-8;
    int max_iterations = 10000;
    std::uint64_t seed = 1;
    /// Previous Ritz block (same vertex count) to continue from.
    const Eigen::MatrixXd* warm_start = nullptr;
};

namespace detail {

inline void deflate_constants(Eigen::MatrixXd& x, const Eigen::VectorXd& mass)
{
    const double total = mass.sum();
    const Eigen::RowVectorXd coeff = (mass.transpose() * x) / total;
    x.rowwise() -= coeff;
}

/// Orthonormalize columns in the M inner product via Householder QR of M^{1/2} X.
inline void mass_orthonormalize(Eigen::MatrixXd& x, const Eigen::VectorXd& sqrt_mass)
{
    Eigen::MatrixXd y = sqrt_mass.asDiagonal() * x;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    y = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
    x = sqrt_mass.cwiseInverse().asDiagonal() * y;
}

} // namespace detail

/// Subspace (block inverse) iteration with Rayleigh-Ritz, constants deflated
/// explicitly. The singular stiffness is factored with vertex 0 grounded; for a
/// right-hand side orthogonal to constants this yields an exact particular
/// solution, which the deflation then moves onto the complement of constants.
/// Degenerate first eigenvalues are fine: any member of the eigenspace is returned.
inline EigenPair first_eigenpair(const WeightedOperators& ops, const EigenOptions& options = {})
{
    const Eigen::Index n = ops.size();
    if (n < 3) {
        throw Error("eigenproblem needs at least 3 vertices");
    }
    if ((ops.mass.array() <= 0.0).any()) {
        throw GeometryError("mass matrix must be positive");
    }
    const Eigen::Index p = std::min<Eigen::Index>(std::max(options.block_size, 1), n - 2);

    const SparseMatrix grounded = ops.stiffness.bottomRightCorner(n - 1, n - 1);
    Eigen::SimplicialLDLT<SparseMatrix> solver(grounded);
    if (solver.info() != Eigen::Success) {
        throw Error("stiffness factorization failed (mesh disconnected?)");
    }

    const Eigen::VectorXd sqrt_mass = ops.mass.cwiseSqrt();
    Eigen::MatrixXd x(n, p);
    {
        std::mt19937_64 gen(options.seed);
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                x(i, j) = 2.0 * detail::unit_uniform(gen) - 1.0;
            }
        }
        if (options.warm_start && options.warm_start->rows() == n) {
            const Eigen::Index q = std::min(p, options.warm_start->cols());
            x.leftCols(q) = options.warm_start->leftCols(q);
        }
    }
    detail::deflate_constants(x, ops.mass);
    detail::mass_orthonormalize(x, sqrt_mass);

    EigenPair out;
    double residual = std::numeric_limits<double>::infinity();
    double theta = 0.0;
    Eigen::MatrixXd y(n, p);
    int it = 0;
    while (true) {
        // Rayleigh-Ritz on the current block.
        const Eigen::MatrixXd kx = ops.stiffness * x;
        Eigen::MatrixXd reduced = x.transpose() * kx;
        reduced = 0.5 * (reduced + reduced.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(reduced);
        x = (x * es.eigenvectors()).eval();
        theta = es.eigenvalues()[0];

        const Eigen::VectorXd f = x.col(0);
        const Eigen::VectorXd kf = ops.stiffness * f;
        const double kf_norm = kf.norm();
        residual = (kf - theta * ops.mass.cwiseProduct(f)).norm() / (kf_norm > 0.0 ? kf_norm : 1.0);
        if (residual <= options.tolerance) {
            break;
        }
        if (it >= options.max_iterations) {
            throw ConvergenceError("first eigenpair did not converge", residual, it);
        }
        ++it;

        const Eigen::MatrixXd rhs = ops.mass.asDiagonal() * x;
        y.row(0).setZero();
        y.bottomRows(n - 1) = solver.solve(rhs.bottomRows(n - 1));
        detail::deflate_constants(y, ops.mass);
        detail::mass_orthonormalize(y, sqrt_mass);
        x = y;
    }

    Eigen::VectorXd f = x.col(0);
    f.array() -= ops.mass.dot(f) / ops.mass.sum();
    f /= std::sqrt(f.dot(ops.mass.cwiseProduct(f)));
    Eigen::Index imax;
    f.cwiseAbs().maxCoeff(&imax);
    if (f[imax] < 0.0) {
        f = -f;
    }
    out.lambda = f.dot(ops.stiffness * f);
    const Eigen::VectorXd kf = ops.stiffness * f;
    out.residual = (kf - out.lambda * ops.mass.cwiseProduct(f)).norm() / kf.norm();
    out.f = std::move(f);
    out.iterations = it;
    out.basis = std::move(x);
    return out;
}

/// Rayleigh quotient f^T K f / f^T M f.
inline double rayleigh(const WeightedOperators& ops, const Eigen::VectorXd& f)
{
    if (f.size() != ops.size()) {
        throw Error("vector size does not match operators");
    }
    const double den = f.dot(ops.mass.cwiseProduct(f));
    if (!(den > 0.0)) {
        throw Error("Rayleigh quotient of the zero vector");
    }
    return f.dot(ops.stiffness * f) / den;
}

} // namespace flowspectra
