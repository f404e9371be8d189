#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "polymesh.hpp"

namespace stagpoly {

enum class StarPointRule {
    chebyshev,  // center of the largest inscribed ball
    barycenter, // area centroid
};

struct InscribedBall {
    Point2 center = Point2::Zero();
    double radius = 0.0;
};

namespace detail {

inline double boundary_clearance(std::span<const Point2> loop, const Point2& x)
{
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < loop.size(); ++i)
        d = std::min(d, point_segment_distance(x, loop[i], loop[(i + 1) % loop.size()]));
    return d;
}

inline bool in_kernel(std::span<const Point2> loop, const Point2& x, double min_twice_area)
{
    for (std::size_t i = 0; i < loop.size(); ++i)
        if (orient2d(x, loop[i], loop[(i + 1) % loop.size()]) <= min_twice_area)
            return false;
    return true;
}

/// Largest inscribed ball of a convex polygon: the linear program
/// max r s.t. n_i.x + r <= b_i has an optimal vertex where three constraints
/// are active, so enumerate all triples.
inline InscribedBall chebyshev_convex(std::span<const Point2> loop)
{
    const std::size_t n = loop.size();
    std::vector<Vector2> normal(n);
    std::vector<double> offset(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector2 d = loop[(i + 1) % n] - loop[i];
        normal[i] = rotate_cw(d) / d.norm();
        offset[i] = normal[i].dot(loop[i]);
    }
    const double scale = diameter(loop);
    const Point2 avg = vertex_average(loop);
    InscribedBall best;
    best.radius = -std::numeric_limits<double>::infinity();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                Eigen::Matrix3d a;
                a << normal[i].x(), normal[i].y(), 1.0,
                     normal[j].x(), normal[j].y(), 1.0,
                     normal[k].x(), normal[k].y(), 1.0;
                if (std::abs(a.determinant()) < 1e-12) continue;
                const Eigen::Vector3d sol = a.partialPivLu().solve(Eigen::Vector3d(offset[i], offset[j], offset[k]));
                const Point2 x(sol[0], sol[1]);
                const double r = sol[2];
                bool feasible = r > 0.0;
                for (std::size_t m = 0; m < n && feasible; ++m)
                    feasible = normal[m].dot(x) + r <= offset[m] + 1e-12 * scale;
                if (!feasible) continue;
                const double dist = (x - avg).norm();
                const bool better = r > best.radius * (1.0 + 1e-13);
                const bool tie = !better && r >= best.radius * (1.0 - 1e-13);
                if (better || (tie && dist < best_dist)) {
                    best.center = x;
                    best.radius = r;
                    best_dist = dist;
                }
            }
        }
    }
    return best;
}

/// Grid-refined search for the point of the kernel farthest from the boundary.
inline InscribedBall chebyshev_search(std::span<const Point2> loop)
{
    const double area_tol = 2e-12 * signed_area(loop);
    Point2 lo = loop.front(), hi = loop.front();
    for (const auto& p : loop) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    InscribedBall best;
    best.radius = -1.0;
    constexpr int samples = 40;
    Point2 center = 0.5 * (lo + hi);
    Vector2 half = 0.5 * (hi - lo);
    for (int round = 0; round < 60; ++round) {
        for (int a = 0; a <= samples; ++a) {
            for (int b = 0; b <= samples; ++b) {
                const Point2 x(center.x() - half.x() + 2.0 * half.x() * a / samples,
                               center.y() - half.y() + 2.0 * half.y() * b / samples);
                if (!in_kernel(loop, x, area_tol)) continue;
                const double r = boundary_clearance(loop, x);
                if (r > best.radius) {
                    best.radius = r;
                    best.center = x;
                }
            }
        }
        if (best.radius < 0.0) break;
        center = best.center;
        half *= 0.25;
    }
    return best;
}

} // namespace detail

/// Chebyshev center and clearance of a single polygon.
inline InscribedBall inscribed_ball(std::span<const Point2> loop)
{
    const bool convex = is_convex_polygon(loop);
    InscribedBall ball = convex ? detail::chebyshev_convex(loop) : detail::chebyshev_search(loop);
    if (!convex && ball.radius < 0.0) fail(ErrorKind::star_shape, "cell is not star-shaped (empty kernel)");
    if (!(ball.radius > 0.0)) fail(ErrorKind::degenerate_cell, "cell has no interior point with positive clearance");
    return ball;
}

inline std::vector<Point2> compute_star_points(const PolyMesh& mesh, StarPointRule rule = StarPointRule::chebyshev)
{
    std::vector<Point2> stars;
    stars.reserve(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        if (rule == StarPointRule::barycenter) {
            stars.push_back(area_centroid(pts));
            continue;
        }
        try {
            stars.push_back(inscribed_ball(pts).center);
        } catch (const Error& e) {
            fail(e.kind(), "cell " + std::to_string(c) + ": " + e.what());
        }
    }
    return stars;
}

/// Triangle formed by a cell edge and the cell's star point.
struct FanTriangle {
    int cell = -1;
    int edge = -1;      // global edge index of F_i
    Point2 a, b;        // endpoints of F_i in the cell's counter-clockwise order
    double area = 0.0;  // |T_i|
    double length = 0.0; // |F_i|
    Vector2 normal;     // outward unit normal of F_i w.r.t. the cell
    Vector2 tangent;    // normal rotated by +90 degrees
    Point2 midpoint;
    Point2 centroid;
};

struct CellGeometry {
    Point2 star = Point2::Zero();
    Point2 vertex_average = Point2::Zero();
    double area = 0.0;
    double scale = 0.0; // h_K = |K|^{1/2}
    double diameter = 0.0;
    int first = 0;      // first fan triangle
    int count = 0;      // number of fan triangles (= number of edges)
};

/// Fan sub-triangulation of every cell around its star point.
class SubTriangulation {
public:
    std::vector<CellGeometry> cells;
    std::vector<FanTriangle> triangles;
    /// For each edge: fan triangle on the left cell and on the right cell (-1 on the boundary).
    std::vector<std::array<int, 2>> edge_triangles;

    std::span<const FanTriangle> fan(int c) const
    {
        return {triangles.data() + cells[c].first, static_cast<std::size_t>(cells[c].count)};
    }

    int num_cells() const { return static_cast<int>(cells.size()); }
};

/// Relative threshold below which a fan triangle counts as degenerate.
inline constexpr double degenerate_area_ratio = 1e-12;

inline SubTriangulation build_subtriangulation(const PolyMesh& mesh, std::span<const Point2> stars)
{
    if (static_cast<int>(stars.size()) != mesh.num_cells())
        fail(ErrorKind::validation, "star point count does not match cell count");
    SubTriangulation sub;
    sub.cells.resize(mesh.cells.size());
    sub.edge_triangles.assign(mesh.edges.size(), {-1, -1});
    sub.triangles.reserve(mesh.edges.size() * 2);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        CellGeometry& g = sub.cells[c];
        g.star = stars[c];
        g.vertex_average = vertex_average(pts);
        g.area = signed_area(pts);
        g.scale = std::sqrt(g.area);
        g.diameter = diameter(pts);
        g.first = static_cast<int>(sub.triangles.size());
        g.count = static_cast<int>(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            FanTriangle t;
            t.cell = c;
            t.edge = mesh.cell_edges[c][i];
            t.a = pts[i];
            t.b = pts[(i + 1) % pts.size()];
            t.area = triangle_area(g.star, t.a, t.b);
            if (!(t.area > degenerate_area_ratio * g.area))
                fail(ErrorKind::star_shape, "cell " + std::to_string(c) + ": fan triangle on local edge "
                                                + std::to_string(i) + " has non-positive area");
            const Vector2 d = t.b - t.a;
            t.length = d.norm();
            t.normal = rotate_cw(d) / t.length;
            t.tangent = rotate_ccw(t.normal);
            t.midpoint = 0.5 * (t.a + t.b);
            t.centroid = (g.star + t.a + t.b) / 3.0;
            const int side = mesh.traverses_forward(c, t.edge) ? 0 : 1;
            sub.edge_triangles[t.edge][side] = static_cast<int>(sub.triangles.size());
            sub.triangles.push_back(t);
        }
    }
    return sub;
}

inline SubTriangulation build_subtriangulation(const PolyMesh& mesh, StarPointRule rule = StarPointRule::chebyshev)
{
    const auto stars = compute_star_points(mesh, rule);
    return build_subtriangulation(mesh, stars);
}

struct CellQuality {
    double chunkiness = 0.0;      // diam(K) / rho_K
    double max_face_ratio = 0.0;  // diam(K) / min |F|
    double clearance = 0.0;       // rho_K
};

struct MeshQualityReport {
    std::vector<CellQuality> cells;
    double max_chunkiness = 0.0;
    double max_face_ratio = 0.0;
};

inline MeshQualityReport quality_report(const PolyMesh& mesh, const SubTriangulation& sub)
{
    MeshQualityReport report;
    report.cells.resize(mesh.cells.size());
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto pts = mesh.cell_points(c);
        const double diam = sub.cells[c].diameter;
        CellQuality& q = report.cells[c];
        q.clearance = inscribed_ball(pts).radius;
        q.chunkiness = diam / q.clearance;
        for (const auto& t : sub.fan(c))
            q.max_face_ratio = std::max(q.max_face_ratio, diam / t.length);
        report.max_chunkiness = std::max(report.max_chunkiness, q.chunkiness);
        report.max_face_ratio = std::max(report.max_face_ratio, q.max_face_ratio);
    }
    return report;
}

} // namespace stagpoly
