#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "polymesh.hpp"

namespace stagpoly {

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementation.
inline double unit_uniform(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Keeps the part of `poly` with (x - m).d <= 0.
inline std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, const Point2& m, const Vector2& d)
{
    std::vector<Point2> out;
    out.reserve(poly.size() + 1);
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        const double sp = (p - m).dot(d);
        const double sq = (q - m).dot(d);
        if (sp <= 0.0) out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
    }
    return out;
}

/// Seeds bucketed on a uniform grid over the unit square.
class SeedGrid {
public:
    explicit SeedGrid(const std::vector<Point2>& seeds)
        : n_(std::max(1, static_cast<int>(std::sqrt(static_cast<double>(seeds.size()))))), buckets_(n_ * n_)
    {
        for (int i = 0; i < static_cast<int>(seeds.size()); ++i)
            buckets_[bucket(seeds[i])].push_back(i);
    }

    int size() const { return n_; }
    double width() const { return 1.0 / n_; }
    int coord(double t) const { return std::clamp(static_cast<int>(t * n_), 0, n_ - 1); }
    int bucket(const Point2& p) const { return coord(p.y()) * n_ + coord(p.x()); }
    const std::vector<int>& at(int i, int j) const { return buckets_[j * n_ + i]; }

private:
    int n_;
    std::vector<std::vector<int>> buckets_;
};

/// Voronoi cell of seed i clipped to the unit square. Rings of buckets are
/// visited until no unvisited seed can cut the current polygon.
inline std::vector<Point2> voronoi_cell(const std::vector<Point2>& seeds, const SeedGrid& grid, int i)
{
    std::vector<Point2> poly{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    const Point2& s = seeds[i];
    const int ci = grid.coord(s.x());
    const int cj = grid.coord(s.y());
    for (int r = 0; r <= grid.size(); ++r) {
        for (int bj = cj - r; bj <= cj + r; ++bj) {
            for (int bi = ci - r; bi <= ci + r; ++bi) {
                if (std::max(std::abs(bi - ci), std::abs(bj - cj)) != r) continue;
                if (bi < 0 || bj < 0 || bi >= grid.size() || bj >= grid.size()) continue;
                for (int j : grid.at(bi, bj)) {
                    if (j == i) continue;
                    poly = clip_half_plane(poly, 0.5 * (s + seeds[j]), seeds[j] - s);
                }
            }
        }
        double reach = 0.0;
        for (const auto& p : poly)
            reach = std::max(reach, (p - s).norm());
        // any seed outside the visited block is at least r * width away
        if (r * grid.width() > 2.0 * reach) break;
    }
    return poly;
}

/// Merges points closer than `tol` through a hash on a grid of spacing tol.
class PointWelder {
public:
    explicit PointWelder(double tol) : tol_(tol) {}

    int add(const Point2& p)
    {
        const auto kx = static_cast<std::int64_t>(std::floor(p.x() / tol_));
        const auto ky = static_cast<std::int64_t>(std::floor(p.y() / tol_));
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = map_.find(key(kx + dx, ky + dy));
                if (it == map_.end()) continue;
                for (int id : it->second)
                    if ((points_[id] - p).norm() <= tol_) return id;
            }
        const int id = static_cast<int>(points_.size());
        points_.push_back(p);
        map_[key(kx, ky)].push_back(id);
        return id;
    }

    std::vector<Point2>& points() { return points_; }

private:
    static std::uint64_t key(std::int64_t x, std::int64_t y)
    {
        return (static_cast<std::uint64_t>(x) * 0x9E3779B97F4A7C15ull) ^ static_cast<std::uint64_t>(y);
    }

    double tol_;
    std::vector<Point2> points_;
    std::unordered_map<std::uint64_t, std::vector<int>> map_;
};

} // namespace detail

/// Voronoi mesh of the given seeds in the unit square after `lloyd_iters`
/// centroid relaxation steps.
inline PolyMesh gen_voronoi_from_seeds(std::vector<Point2> seeds, int lloyd_iters)
{
    if (seeds.size() < 2) fail(ErrorKind::generation, "Voronoi generation needs at least 2 seeds");
    for (const auto& s : seeds)
        if (!(s.x() > 0.0 && s.x() < 1.0 && s.y() > 0.0 && s.y() < 1.0))
            fail(ErrorKind::generation, "Voronoi seeds must lie inside the unit square");
    {
        const detail::SeedGrid grid(seeds);
        for (int i = 0; i < static_cast<int>(seeds.size()); ++i) {
            const int ci = grid.coord(seeds[i].x());
            const int cj = grid.coord(seeds[i].y());
            for (int bj = std::max(0, cj - 1); bj <= std::min(grid.size() - 1, cj + 1); ++bj)
                for (int bi = std::max(0, ci - 1); bi <= std::min(grid.size() - 1, ci + 1); ++bi)
                    for (int j : grid.at(bi, bj))
                        if (j != i && (seeds[j] - seeds[i]).norm() <= 1e-12)
                            fail(ErrorKind::generation, "duplicate Voronoi seeds " + std::to_string(std::min(i, j))
                                                            + " and " + std::to_string(std::max(i, j)));
        }
    }

    std::vector<std::vector<Point2>> polys(seeds.size());
    auto build = [&] {
        const detail::SeedGrid grid(seeds);
        for (int i = 0; i < static_cast<int>(seeds.size()); ++i)
            polys[i] = detail::voronoi_cell(seeds, grid, i);
    };
    build();
    for (int it = 0; it < lloyd_iters; ++it) {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            seeds[i] = area_centroid(polys[i]);
        build();
    }

    detail::PointWelder welder(1e-10);
    std::vector<std::vector<int>> cells(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto& loop = cells[i];
        for (const auto& p : polys[i]) {
            const int id = welder.add(p);
            if (loop.empty() || loop.back() != id) loop.push_back(id);
        }
        while (loop.size() > 1 && loop.front() == loop.back())
            loop.pop_back();
        if (loop.size() < 3) fail(ErrorKind::generation, "Voronoi cell " + std::to_string(i) + " collapsed");
    }
    PolyMesh mesh = make_mesh(std::move(welder.points()), std::move(cells));
    for (const auto& e : mesh.edges)
        if (e.is_boundary() && e.marker == tag_none)
            fail(ErrorKind::generation, "Voronoi diagram is not conforming");
    return mesh;
}

/// Lloyd-relaxed Voronoi mesh of `n_seeds` uniformly random seeds.
inline PolyMesh gen_voronoi_polygons(int n_seeds, int lloyd_iters, std::uint64_t rng_seed)
{
    if (n_seeds < 2) fail(ErrorKind::generation, "Voronoi generation needs at least 2 seeds");
    std::mt19937_64 gen(rng_seed);
    std::vector<Point2> seeds(static_cast<std::size_t>(n_seeds));
    for (auto& s : seeds) {
        const double x = detail::unit_uniform(gen);
        const double y = detail::unit_uniform(gen);
        s = Point2(x, y);
    }
    // a zero coordinate is possible in principle; nudge it inside
    for (auto& s : seeds)
        s = s.cwiseMax(Point2(1e-9, 1e-9));
    return gen_voronoi_from_seeds(std::move(seeds), lloyd_iters);
}

/// Delaunay triangulation (Bowyer-Watson) of the unit-square corners and
/// `n_interior` random interior points.
inline PolyMesh gen_delaunay_triangles(int n_interior, std::uint64_t rng_seed)
{
    if (n_interior < 0) fail(ErrorKind::generation, "point count must be >= 0");
    std::mt19937_64 gen(rng_seed);
    std::vector<Point2> pts{{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    for (int i = 0; i < n_interior; ++i) {
        const double x = 0.02 + 0.96 * detail::unit_uniform(gen);
        const double y = 0.02 + 0.96 * detail::unit_uniform(gen);
        pts.emplace_back(x, y);
    }
    const int np = static_cast<int>(pts.size());
    std::vector<Point2> all = pts;
    all.emplace_back(-100.0, -100.0);
    all.emplace_back(100.0, -100.0);
    all.emplace_back(0.0, 100.0);
    std::vector<std::array<int, 3>> tris{{np, np + 1, np + 2}};

    auto in_circle = [&all](const std::array<int, 3>& t, const Point2& p) {
        const Point2 a = all[t[0]] - p, b = all[t[1]] - p, c = all[t[2]] - p;
        const double det = (a.squaredNorm()) * cross(b, c) - (b.squaredNorm()) * cross(a, c)
                           + (c.squaredNorm()) * cross(a, b);
        return det > 0.0;
    };
    for (int i = 0; i < np; ++i) {
        const Point2& p = all[i];
        std::vector<std::array<int, 3>> keep;
        std::vector<std::array<int, 2>> boundary;
        std::map<std::pair<int, int>, int> edge_count;
        std::vector<std::array<int, 3>> bad;
        for (const auto& t : tris)
            (in_circle(t, p) ? bad : keep).push_back(t);
        for (const auto& t : bad)
            for (int k = 0; k < 3; ++k)
                ++edge_count[std::minmax(t[k], t[(k + 1) % 3])];
        for (const auto& t : bad)
            for (int k = 0; k < 3; ++k)
                if (edge_count[std::minmax(t[k], t[(k + 1) % 3])] == 1) boundary.push_back({t[k], t[(k + 1) % 3]});
        for (const auto& e : boundary)
            keep.push_back({e[0], e[1], i});
        tris = std::move(keep);
    }
    std::vector<std::vector<int>> cells;
    for (const auto& t : tris) {
        if (t[0] >= np || t[1] >= np || t[2] >= np) continue;
        if (!(orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0))
            fail(ErrorKind::generation, "degenerate Delaunay triangle");
        cells.push_back({t[0], t[1], t[2]});
    }
    std::sort(cells.begin(), cells.end());
    double area = 0.0;
    for (const auto& c : cells)
        area += triangle_area(pts[c[0]], pts[c[1]], pts[c[2]]);
    if (std::abs(area - 1.0) > 1e-12) fail(ErrorKind::generation, "Delaunay triangulation does not cover the square");
    return make_mesh(std::move(pts), std::move(cells));
}

} // namespace stagpoly
