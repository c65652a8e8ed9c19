#pragma once

#include "flowspectra/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

namespace flowspectra {

using Index = std::size_t;

struct MeshOptions {
    /// Element measure floor, relative to the squared (surface) or plain
    /// (curve) bounding-box diagonal at construction time.
    double relative_floor = 1e-12;
};

/// Connectivity shared between all meshes produced from one construction.
/// Positions change along a flow, this does not.
template <int Dim>
struct Topology {
    std::vector<std::array<Index, Dim + 1>> elements;
    std::vector<std::array<Index, 2>> edges;
    std::vector<std::vector<Index>> neighbors;
    std::vector<std::vector<Index>> incident;
    std::vector<std::vector<Index>> two_ring;
    double measure_floor = 0.0;
};

namespace detail {

template <int Dim>
void build_adjacency(Topology<Dim>& topo, Index num_vertices)
{
    topo.neighbors.assign(num_vertices, {});
    topo.incident.assign(num_vertices, {});
    topo.edges.clear();
    for (Index e = 0; e < topo.elements.size(); ++e) {
        const auto& el = topo.elements[e];
        for (int a = 0; a <= Dim; ++a) {
            topo.incident[el[a]].push_back(e);
            for (int b = a + 1; b <= Dim; ++b) {
                Index i = std::min(el[a], el[b]);
                Index j = std::max(el[a], el[b]);
                topo.neighbors[i].push_back(j);
                topo.neighbors[j].push_back(i);
            }
        }
    }
    for (Index v = 0; v < num_vertices; ++v) {
        auto& nb = topo.neighbors[v];
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
        for (Index w : nb) {
            if (v < w) {
                topo.edges.push_back({v, w});
            }
        }
    }
    topo.two_ring.assign(num_vertices, {});
    for (Index v = 0; v < num_vertices; ++v) {
        auto& ring = topo.two_ring[v];
        for (Index w : topo.neighbors[v]) {
            ring.push_back(w);
            for (Index u : topo.neighbors[w]) {
                if (u != v) {
                    ring.push_back(u);
                }
            }
        }
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    }
}

template <int Dim>
bool is_connected(const Topology<Dim>& topo)
{
    const Index n = topo.neighbors.size();
    if (n == 0) {
        return false;
    }
    std::vector<char> seen(n, 0);
    std::vector<Index> stack{0};
    seen[0] = 1;
    Index count = 1;
    while (!stack.empty()) {
        Index v = stack.back();
        stack.pop_back();
        for (Index w : topo.neighbors[v]) {
            if (!seen[w]) {
                seen[w] = 1;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == n;
}

template <class Point>
double bbox_diagonal(const std::vector<Point>& pts)
{
    Point lo = pts.front();
    Point hi = pts.front();
    for (const auto& p : pts) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

inline bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                               const Eigen::Vector2d& q1, const Eigen::Vector2d& q2)
{
    const double d1 = cross2(q2 - q1, p1 - q1);
    const double d2 = cross2(q2 - q1, p2 - q1);
    const double d3 = cross2(p2 - p1, q1 - p1);
    const double d4 = cross2(p2 - p1, q2 - p1);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

} // namespace detail

/// Closed polygonal curve in the plane. Vertices are cyclic and
/// counter-clockwise; segment i joins vertex i to vertex i+1 (mod N).
class CurveMesh {
public:
    static constexpr int dim = 1;
    static constexpr int ambient_dim = 2;
    using Point = Eigen::Vector2d;
    using Element = std::array<Index, 2>;

    explicit CurveMesh(std::vector<Point> vertices, const MeshOptions& options = {})
        : vertices_(std::move(vertices))
    {
        const Index n = vertices_.size();
        if (n < 3) {
            throw GeometryError("curve needs at least 3 vertices");
        }
        auto topo = std::make_shared<Topology<1>>();
        for (Index i = 0; i < n; ++i) {
            topo->elements.push_back({i, (i + 1) % n});
        }
        detail::build_adjacency(*topo, n);
        topo->measure_floor = options.relative_floor * detail::bbox_diagonal(vertices_);
        topo_ = std::move(topo);

        for (Index i = 0; i < n; ++i) {
            if ((vertices_[(i + 1) % n] - vertices_[i]).norm() <= topo_->measure_floor) {
                throw GeometryError("consecutive curve vertices coincide", i);
            }
        }
        if (enclosed_area() <= 0.0) {
            throw GeometryError("curve must be positively oriented (counter-clockwise)");
        }
        for (Index i = 0; i < n; ++i) {
            for (Index j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) {
                    continue;
                }
                if (detail::segments_intersect(vertices_[i], vertices_[(i + 1) % n], vertices_[j],
                                               vertices_[(j + 1) % n])) {
                    throw GeometryError("curve is self-intersecting at segment", i);
                }
            }
        }
    }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Element>& elements() const noexcept { return topo_->elements; }
    const Topology<1>& topology() const noexcept { return *topo_; }
    Index num_vertices() const noexcept { return vertices_.size(); }

    /// Same connectivity, new positions. Validity of the result is the
    /// caller's responsibility (see flow step checks).
    CurveMesh with_positions(std::vector<Point> positions) const
    {
        CurveMesh out(*this);
        out.vertices_ = std::move(positions);
        return out;
    }

    /// Shoelace area; positive for counter-clockwise curves.
    double enclosed_area() const
    {
        double a = 0.0;
        const Index n = vertices_.size();
        for (Index i = 0; i < n; ++i) {
            a += detail::cross2(vertices_[i], vertices_[(i + 1) % n]);
        }
        return 0.5 * a;
    }

private:
    std::vector<Point> vertices_;
    std::shared_ptr<const Topology<1>> topo_;
};

/// Closed oriented triangle surface in R^3 with outward-facing triangles.
class SurfaceMesh {
public:
    static constexpr int dim = 2;
    static constexpr int ambient_dim = 3;
    using Point = Eigen::Vector3d;
    using Element = std::array<Index, 3>;

    SurfaceMesh(std::vector<Point> vertices, std::vector<Element> triangles,
                const MeshOptions& options = {})
        : vertices_(std::move(vertices))
    {
        const Index n = vertices_.size();
        if (n < 4 || triangles.size() < 4) {
            throw GeometryError("surface needs at least 4 vertices and 4 triangles");
        }
        std::map<std::pair<Index, Index>, int> directed;
        for (Index t = 0; t < triangles.size(); ++t) {
            const auto& tri = triangles[t];
            for (int a = 0; a < 3; ++a) {
                if (tri[a] >= n) {
                    throw GeometryError("triangle references missing vertex", t);
                }
                if (tri[a] == tri[(a + 1) % 3]) {
                    throw GeometryError("triangle repeats a vertex", t);
                }
                if (++directed[{tri[a], tri[(a + 1) % 3]}] > 1) {
                    throw GeometryError("edge used twice with the same orientation", tri[a]);
                }
            }
        }
        for (const auto& [edge, count] : directed) {
            if (directed.find({edge.second, edge.first}) == directed.end()) {
                throw GeometryError("boundary or inconsistently oriented edge at vertex",
                                    edge.first);
            }
        }

        auto topo = std::make_shared<Topology<2>>();
        topo->elements = std::move(triangles);
        detail::build_adjacency(*topo, n);
        const double diag = detail::bbox_diagonal(vertices_);
        topo->measure_floor = options.relative_floor * diag * diag;
        for (Index v = 0; v < n; ++v) {
            if (topo->incident[v].empty()) {
                throw GeometryError("isolated vertex", v);
            }
        }
        if (!detail::is_connected(*topo)) {
            throw GeometryError("surface must be connected");
        }
        topo_ = std::move(topo);

        for (Index t = 0; t < topo_->elements.size(); ++t) {
            if (triangle_area(t) <= topo_->measure_floor) {
                throw GeometryError("degenerate triangle", t);
            }
        }
        if (enclosed_volume() <= 0.0) {
            throw GeometryError("surface must enclose positive volume (outward orientation)");
        }
    }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }
    const std::vector<Element>& elements() const noexcept { return topo_->elements; }
    const Topology<2>& topology() const noexcept { return *topo_; }
    Index num_vertices() const noexcept { return vertices_.size(); }

    SurfaceMesh with_positions(std::vector<Point> positions) const
    {
        SurfaceMesh out(*this);
        out.vertices_ = std::move(positions);
        return out;
    }

    Point triangle_normal(Index t) const
    {
        const auto& tri = topo_->elements[t];
        return (vertices_[tri[1]] - vertices_[tri[0]]).cross(vertices_[tri[2]] - vertices_[tri[0]]);
    }

    double triangle_area(Index t) const { return 0.5 * triangle_normal(t).norm(); }

    double enclosed_volume() const
    {
        double v = 0.0;
        for (const auto& tri : topo_->elements) {
            v += vertices_[tri[0]].dot(vertices_[tri[1]].cross(vertices_[tri[2]]));
        }
        return v / 6.0;
    }

private:
    std::vector<Point> vertices_;
    std::shared_ptr<const Topology<2>> topo_;
};

template <class M>
concept DiscreteHypersurface = std::same_as<M, CurveMesh> || std::same_as<M, SurfaceMesh>;

/// Length of a segment or area of a triangle.
inline double element_measure(const CurveMesh& mesh, const CurveMesh::Element& e)
{
    return (mesh.vertices()[e[1]] - mesh.vertices()[e[0]]).norm();
}

inline double element_measure(const SurfaceMesh& mesh, const SurfaceMesh::Element& e)
{
    const auto& x = mesh.vertices();
    return 0.5 * (x[e[1]] - x[e[0]]).cross(x[e[2]] - x[e[0]]).norm();
}

/// Gradients of the piecewise-linear hat functions on one element.
inline std::array<Eigen::Vector2d, 2> basis_gradients(const CurveMesh& mesh,
                                                      const CurveMesh::Element& e)
{
    const Eigen::Vector2d d = mesh.vertices()[e[1]] - mesh.vertices()[e[0]];
    const Eigen::Vector2d g = d / d.squaredNorm();
    return {-g, g};
}

inline std::array<Eigen::Vector3d, 3> basis_gradients(const SurfaceMesh& mesh,
                                                      const SurfaceMesh::Element& e)
{
    const auto& x = mesh.vertices();
    const Eigen::Vector3d n = (x[e[1]] - x[e[0]]).cross(x[e[2]] - x[e[0]]);
    const double n2 = n.squaredNorm();
    std::array<Eigen::Vector3d, 3> g;
    for (int a = 0; a < 3; ++a) {
        const Eigen::Vector3d opposite = x[e[(a + 2) % 3]] - x[e[(a + 1) % 3]];
        g[a] = n.cross(opposite) / n2;
    }
    return g;
}

/// Total length (curve) or area (surface).
template <DiscreteHypersurface M>
double total_measure(const M& mesh)
{
    double s = 0.0;
    for (const auto& e : mesh.elements()) {
        s += element_measure(mesh, e);
    }
    return s;
}

inline double enclosed_volume(const CurveMesh& mesh) { return mesh.enclosed_area(); }
inline double enclosed_volume(const SurfaceMesh& mesh) { return mesh.enclosed_volume(); }

/// Radius of the round sphere (circle) with the same total measure.
inline double characteristic_radius(const CurveMesh& mesh)
{
    return total_measure(mesh) / (2.0 * std::numbers::pi);
}

inline double characteristic_radius(const SurfaceMesh& mesh)
{
    return std::sqrt(total_measure(mesh) / (4.0 * std::numbers::pi));
}

template <DiscreteHypersurface M>
double min_edge_length(const M& mesh)
{
    double h = std::numeric_limits<double>::infinity();
    const auto& x = mesh.vertices();
    for (const auto& [i, j] : mesh.topology().edges) {
        h = std::min(h, (x[j] - x[i]).norm());
    }
    return h;
}

/// Uniform scaling about the origin.
template <DiscreteHypersurface M>
M scaled(const M& mesh, double factor)
{
    auto pos = mesh.vertices();
    for (auto& p : pos) {
        p *= factor;
    }
    return mesh.with_positions(std::move(pos));
}

} // namespace flowspectra
