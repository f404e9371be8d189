#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace stagpoly {

/// Boundary tags preassigned on the unit square (and any axis-aligned box).
enum BoundaryTag : int {
    tag_none = 0,
    tag_left = 1,
    tag_right = 2,
    tag_bottom = 3,
    tag_top = 4,
};

/// Oriented edge. `v` follows the traversal direction of the `left` cell, so
/// the outward normal of `left` is the clockwise rotation of v[1] - v[0].
struct Edge {
    std::array<int, 2> v{};
    int left = -1;
    int right = -1; // -1 on the boundary
    int marker = tag_none;

    bool is_boundary() const { return right < 0; }
};

struct MarkerSpec {
    int v0 = 0;
    int v1 = 0;
    int tag = 0;
};

struct BoundingBox {
    Point2 min = Point2::Zero();
    Point2 max = Point2::Zero();
};

/// Polygonal mesh with counter-clockwise cells and edge adjacency.
/// Immutable once built by make_mesh().
class PolyMesh {
public:
    std::vector<Point2> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<Edge> edges;
    /// cell_edges[c][i] is the edge joining cells[c][i] and cells[c][i+1].
    std::vector<std::vector<int>> cell_edges;
    BoundingBox bbox;
    /// Reported mesh size h; 1/n for structured families.
    double mesh_size = 0.0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_cells() const { return static_cast<int>(cells.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }

    int num_boundary_edges() const
    {
        int count = 0;
        for (const auto& e : edges)
            count += e.is_boundary() ? 1 : 0;
        return count;
    }

    int num_interior_edges() const { return num_edges() - num_boundary_edges(); }

    std::vector<Point2> cell_points(int c) const
    {
        std::vector<Point2> pts;
        pts.reserve(cells[c].size());
        for (int v : cells[c])
            pts.push_back(vertices[v]);
        return pts;
    }

    double cell_area(int c) const { return signed_area(cell_points(c)); }

    double cell_diameter(int c) const { return diameter(cell_points(c)); }

    bool all_triangles() const
    {
        for (const auto& loop : cells)
            if (loop.size() != 3) return false;
        return true;
    }

    /// True when cell c traverses edge e in the stored direction (c is its left cell).
    bool traverses_forward(int c, int e) const { return edges[e].left == c; }

    double max_cell_diameter() const
    {
        double h = 0.0;
        for (int c = 0; c < num_cells(); ++c)
            h = std::max(h, cell_diameter(c));
        return h;
    }
};

namespace detail {

inline int side_tag(const Point2& a, const Point2& b, const BoundingBox& box)
{
    const double tol = 1e-12 * std::max(1.0, (box.max - box.min).norm());
    auto near = [tol](double s, double t) { return std::abs(s - t) <= tol; };
    if (near(a.x(), box.min.x()) && near(b.x(), box.min.x())) return tag_left;
    if (near(a.x(), box.max.x()) && near(b.x(), box.max.x())) return tag_right;
    if (near(a.y(), box.min.y()) && near(b.y(), box.min.y())) return tag_bottom;
    if (near(a.y(), box.max.y()) && near(b.y(), box.max.y())) return tag_top;
    return tag_none;
}

} // namespace detail

/// Builds and validates a mesh. Boundary edges not listed in `markers` get the
/// bounding-box side tag (1 left, 2 right, 3 bottom, 4 top) or 0 when they do not
/// lie on a side.
inline PolyMesh make_mesh(std::vector<Point2> vertices, std::vector<std::vector<int>> cells,
                          const std::vector<MarkerSpec>& markers = {},
                          std::optional<double> mesh_size = std::nullopt)
{
    if (cells.empty()) fail(ErrorKind::validation, "mesh has no cells");
    const int nv = static_cast<int>(vertices.size());
    for (const auto& p : vertices)
        if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
            fail(ErrorKind::validation, "non-finite vertex coordinate");

    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& loop = cells[c];
        if (loop.size() < 3)
            fail(ErrorKind::validation, "cell " + std::to_string(c) + " has fewer than 3 vertices");
        for (int v : loop)
            if (v < 0 || v >= nv)
                fail(ErrorKind::validation, "cell " + std::to_string(c) + " references vertex out of range");
        for (std::size_t i = 0; i < loop.size(); ++i)
            for (std::size_t j = i + 1; j < loop.size(); ++j)
                if (loop[i] == loop[j])
                    fail(ErrorKind::validation,
                         "cell " + std::to_string(c) + " lists vertex " + std::to_string(loop[i]) + " twice");
    }

    PolyMesh mesh;
    mesh.vertices = std::move(vertices);
    mesh.cells = std::move(cells);

    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        if (!is_simple_polygon(pts))
            fail(ErrorKind::orientation, "cell " + std::to_string(c) + " is self-intersecting");
        if (signed_area(pts) <= 0.0)
            fail(ErrorKind::orientation, "cell " + std::to_string(c) + " is clockwise or has zero area");
    }

    mesh.bbox.min = mesh.vertices.front();
    mesh.bbox.max = mesh.vertices.front();
    for (const auto& p : mesh.vertices) {
        mesh.bbox.min = mesh.bbox.min.cwiseMin(p);
        mesh.bbox.max = mesh.bbox.max.cwiseMax(p);
    }

    std::map<std::pair<int, int>, int> edge_id;
    mesh.cell_edges.resize(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto& loop = mesh.cells[c];
        const std::size_t n = loop.size();
        mesh.cell_edges[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const int a = loop[i];
            const int b = loop[(i + 1) % n];
            const auto key = std::minmax(a, b);
            auto it = edge_id.find(key);
            if (it == edge_id.end()) {
                const int id = mesh.num_edges();
                edge_id.emplace(key, id);
                Edge e;
                e.v = {a, b};
                e.left = c;
                mesh.edges.push_back(e);
                mesh.cell_edges[c][i] = id;
                continue;
            }
            Edge& e = mesh.edges[it->second];
            if (e.right >= 0)
                fail(ErrorKind::non_manifold, "edge (" + std::to_string(a) + ", " + std::to_string(b)
                                                  + ") is shared by more than two cells");
            if (e.v[0] == a)
                fail(ErrorKind::orientation, "cells " + std::to_string(e.left) + " and " + std::to_string(c)
                                                 + " traverse a shared edge in the same direction");
            e.right = c;
            mesh.cell_edges[c][i] = it->second;
        }
    }

    std::vector<bool> used(mesh.vertices.size(), false);
    for (const auto& loop : mesh.cells)
        for (int v : loop)
            used[v] = true;
    for (std::size_t v = 0; v < used.size(); ++v)
        if (!used[v]) fail(ErrorKind::validation, "vertex " + std::to_string(v) + " is not used by any cell");

    for (auto& e : mesh.edges)
        if (e.is_boundary())
            e.marker = detail::side_tag(mesh.vertices[e.v[0]], mesh.vertices[e.v[1]], mesh.bbox);
    for (const auto& m : markers) {
        auto it = edge_id.find(std::minmax(m.v0, m.v1));
        if (it == edge_id.end())
            fail(ErrorKind::validation,
                 "boundary marker references missing edge (" + std::to_string(m.v0) + ", " + std::to_string(m.v1) + ")");
        Edge& e = mesh.edges[it->second];
        if (!e.is_boundary())
            fail(ErrorKind::validation, "boundary marker on interior edge (" + std::to_string(m.v0) + ", "
                                            + std::to_string(m.v1) + ")");
        e.marker = m.tag;
    }

    mesh.mesh_size = mesh_size ? *mesh_size : mesh.max_cell_diameter();
    return mesh;
}

/// Unit square split into n x n squares, each cut along its lower-left to
/// upper-right diagonal.
inline PolyMesh gen_uniform_triangles(int n)
{
    if (n < 1) fail(ErrorKind::validation, "grid count must be >= 1");
    std::vector<Point2> verts;
    verts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::vector<int>> cells;
    cells.reserve(static_cast<std::size_t>(2 * n * n));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return make_mesh(std::move(verts), std::move(cells), {}, 1.0 / n);
}

/// Unit square split into n x n squares.
inline PolyMesh gen_uniform_squares(int n)
{
    if (n < 1) fail(ErrorKind::validation, "grid count must be >= 1");
    std::vector<Point2> verts;
    verts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
    auto id = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::vector<int>> cells;
    cells.reserve(static_cast<std::size_t>(n * n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    return make_mesh(std::move(verts), std::move(cells), {}, 1.0 / n);
}

} // namespace stagpoly
