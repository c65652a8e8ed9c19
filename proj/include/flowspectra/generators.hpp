#pragma once

#include "flowspectra/mesh.hpp"

#include <Eigen/Eigenvalues>

#include <cstdint>
#include <map>
#include <numbers>
#include <random>

namespace flowspectra {

/// Regular N-gon inscribed in the circle of the given radius, counter-clockwise.
inline CurveMesh regular_polygon(Index n, double radius = 1.0)
{
    if (n < 3 || !(radius > 0.0)) {
        throw GeometryError("regular polygon needs n >= 3 and radius > 0");
    }
    std::vector<Eigen::Vector2d> pts(n);
    for (Index i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        pts[i] = radius * Eigen::Vector2d(std::cos(a), std::sin(a));
    }
    return CurveMesh(std::move(pts));
}

namespace detail {

struct UnitIcosphere {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<SurfaceMesh::Element> triangles;
};

inline UnitIcosphere unit_icosphere(int subdivisions)
{
    const double p = (1.0 + std::sqrt(5.0)) / 2.0;
    UnitIcosphere s;
    s.vertices = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                  {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
    for (auto& v : s.vertices) {
        v.normalize();
    }
    s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                   {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                   {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                   {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<Index, Index>, Index> midpoint;
        auto mid = [&](Index a, Index b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) {
                return it->second;
            }
            s.vertices.push_back((s.vertices[a] + s.vertices[b]).normalized());
            const Index id = s.vertices.size() - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<SurfaceMesh::Element> next;
        next.reserve(4 * s.triangles.size());
        for (const auto& t : s.triangles) {
            const Index ab = mid(t[0], t[1]);
            const Index bc = mid(t[1], t[2]);
            const Index ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.triangles = std::move(next);
    }
    return s;
}

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform
/// for a given engine state.
inline double unit_uniform(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

} // namespace detail

/// Subdivided icosahedron projected onto the sphere of the given radius.
inline SurfaceMesh icosphere(double radius = 1.0, int subdivisions = 4)
{
    if (!(radius > 0.0) || subdivisions < 0) {
        throw GeometryError("icosphere needs radius > 0 and subdivisions >= 0");
    }
    auto s = detail::unit_icosphere(subdivisions);
    for (auto& v : s.vertices) {
        v *= radius;
    }
    return SurfaceMesh(std::move(s.vertices), std::move(s.triangles));
}

/// Icosphere stretched to semi-axes (a, b, c).
inline SurfaceMesh ellipsoid(double a, double b, double c, int subdivisions = 4)
{
    if (!(a > 0.0 && b > 0.0 && c > 0.0) || subdivisions < 0) {
        throw GeometryError("ellipsoid needs positive semi-axes");
    }
    auto s = detail::unit_icosphere(subdivisions);
    for (auto& v : s.vertices) {
        v = Eigen::Vector3d(a * v.x(), b * v.y(), c * v.z());
    }
    return SurfaceMesh(std::move(s.vertices), std::move(s.triangles));
}

/// Star-shaped icosphere with radial profile R(1 + amplitude * q(x)), where q is a
/// seeded random quadratic harmonic (trace-free quadratic form) with max |q| = 1.
/// Small amplitudes keep the surface smooth and convex.
inline SurfaceMesh perturbed_icosphere(double radius, int subdivisions, double amplitude,
                                       std::uint64_t seed)
{
    if (!(radius > 0.0) || subdivisions < 0 || !(std::abs(amplitude) < 0.5)) {
        throw GeometryError("perturbed icosphere needs radius > 0 and |amplitude| < 0.5");
    }
    std::mt19937_64 gen(seed);
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) {
        for (int j = i; j < 3; ++j) {
            a(i, j) = a(j, i) = 2.0 * detail::unit_uniform(gen) - 1.0;
        }
    }
    a -= (a.trace() / 3.0) * Eigen::Matrix3d::Identity();
    const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(a).eigenvalues();
    a /= ev.cwiseAbs().maxCoeff();

    auto s = detail::unit_icosphere(subdivisions);
    for (auto& v : s.vertices) {
        v *= radius * (1.0 + amplitude * v.dot(a * v));
    }
    return SurfaceMesh(std::move(s.vertices), std::move(s.triangles));
}

} // namespace flowspectra
