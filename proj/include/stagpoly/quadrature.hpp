#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace stagpoly {

/// Quadrature rule on a reference domain: the triangle {x, y >= 0, x + y <= 1}
/// (weights sum to 1/2) or the interval [0, 1] (points stored in x, weights sum to 1).
struct QuadRule {
    std::vector<Point2> points;
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return points.size(); }
};

inline constexpr int max_triangle_degree = 10;
inline constexpr int max_edge_points = 6;

namespace detail {

/// Legendre polynomial P_n(z) and P_{n-1}(z) by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double z)
{
    double prev = 1.0, cur = z;
    for (int k = 2; k <= n; ++k) {
        const double next = ((2.0 * k - 1.0) * z * cur - (k - 1.0) * prev) / k;
        prev = cur;
        cur = next;
    }
    return {cur, prev};
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [pn, pm1] = legendre_pair(n, z);
            const double dp = n * (z * pn - pm1) / (z * z - 1.0);
            const double dz = pn / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const auto [pn, pm1] = legendre_pair(n, z);
        const double dp = n * (z * pn - pm1) / (z * z - 1.0);
        x[i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace detail

/// Gauss rule on [0, 1] with `npoints` nodes, exact to degree 2*npoints - 1.
inline QuadRule edge_rule(int npoints)
{
    if (npoints < 1 || npoints > max_edge_points)
        fail(ErrorKind::capability, "edge rule supports 1.." + std::to_string(max_edge_points) + " points, got "
                                        + std::to_string(npoints));
    std::vector<double> x, w;
    detail::gauss_legendre(npoints, x, w);
    QuadRule rule;
    rule.degree = 2 * npoints - 1;
    for (int i = 0; i < npoints; ++i) {
        rule.points.emplace_back(0.5 * (x[i] + 1.0), 0.0);
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

/// Rule on the reference triangle exact to `degree`. Degrees <= 2 use the three
/// edge-midpoint rule; higher degrees use a collapsed Gauss product rule.
inline QuadRule triangle_rule(int degree)
{
    if (degree < 0 || degree > max_triangle_degree)
        fail(ErrorKind::capability, "triangle rule supports degree 0.." + std::to_string(max_triangle_degree)
                                        + ", got " + std::to_string(degree));
    QuadRule rule;
    if (degree <= 2) {
        rule.degree = 2;
        rule.points = {Point2(0.5, 0.0), Point2(0.5, 0.5), Point2(0.0, 0.5)};
        rule.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
        return rule;
    }
    // x = u, y = (1 - u) v with Jacobian (1 - u): degree + 1 in u, degree in v.
    const int n = (degree + 2 + 1) / 2;
    std::vector<double> gx, gw;
    detail::gauss_legendre(n, gx, gw);
    rule.degree = degree;
    for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (gx[i] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double v = 0.5 * (gx[j] + 1.0);
            rule.points.emplace_back(u, (1.0 - u) * v);
            rule.weights.push_back(0.25 * gw[i] * gw[j] * (1.0 - u));
        }
    }
    return rule;
}

/// Quadrature point in physical coordinates with its physical weight.
/// Four-point rule of degree 3 (centroid weight -27/48, then (3/5, 1/5, 1/5)
/// permutations with 25/48), in the reference measure 1/2.
inline QuadRule cubic_triangle_rule()
{
    QuadRule rule;
    rule.degree = 3;
    rule.points = {Point2(1.0 / 3.0, 1.0 / 3.0), Point2(0.2, 0.2), Point2(0.6, 0.2), Point2(0.2, 0.6)};
    rule.weights = {-27.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0, 25.0 / 96.0};
    return rule;
}

struct QuadPoint {
    Point2 x;
    double w;
};

/// Maps a reference-triangle rule onto triangle (p0, p1, p2).
inline std::vector<QuadPoint> map_to_triangle(const QuadRule& rule, const Point2& p0, const Point2& p1,
                                              const Point2& p2)
{
    const double jac = 2.0 * std::abs(triangle_area(p0, p1, p2));
    std::vector<QuadPoint> out;
    out.reserve(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2& r = rule.points[q];
        out.push_back({p0 + r.x() * (p1 - p0) + r.y() * (p2 - p0), rule.weights[q] * jac});
    }
    return out;
}

/// Maps an interval rule onto segment [a, b].
inline std::vector<QuadPoint> map_to_segment(const QuadRule& rule, const Point2& a, const Point2& b)
{
    const double len = (b - a).norm();
    std::vector<QuadPoint> out;
    out.reserve(rule.size());
    for (std::size_t q = 0; q < rule.size(); ++q)
        out.push_back({a + rule.points[q].x() * (b - a), rule.weights[q] * len});
    return out;
}

} // namespace stagpoly
