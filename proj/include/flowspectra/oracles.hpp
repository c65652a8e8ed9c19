#pragma once

#include "flowspectra/error.hpp"

#include <cmath>

namespace flowspectra {

/// Round n-sphere of initial radius R shrinking under mean curvature flow,
/// with the first nonzero Laplacian eigenvalue (phi = 0).
struct SphereSolution {
    double radius = 0.0;
    double mean_curvature = 0.0;
    double lambda = 0.0;
    double singular_time = 0.0;
};

inline double sphere_singular_time(double initial_radius, int n)
{
    if (!(initial_radius > 0.0) || n < 1) {
        throw DomainError("sphere oracle needs R > 0 and n >= 1");
    }
    return initial_radius * initial_radius / (2.0 * n);
}

/// r(t) = sqrt(R^2 - 2 n t), H = n / r, lambda = n / r^2, T = R^2 / (2 n).
inline SphereSolution sphere_at(double initial_radius, int n, double t)
{
    const double t_sing = sphere_singular_time(initial_radius, n);
    if (t < 0.0 || t >= t_sing) {
        throw DomainError("time outside [0, R^2 / 2n)");
    }
    const double r2 = initial_radius * initial_radius - 2.0 * n * t;
    SphereSolution s;
    s.radius = std::sqrt(r2);
    s.mean_curvature = n / s.radius;
    s.lambda = n / r2;
    s.singular_time = t_sing;
    return s;
}

/// dlambda/dt = 2 H^2 lambda / n on the shrinking sphere.
inline double example_rate(double initial_radius, int n, double t)
{
    const auto s = sphere_at(initial_radius, n, t);
    return 2.0 * s.mean_curvature * s.mean_curvature * s.lambda / n;
}

} // namespace flowspectra
