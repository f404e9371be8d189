#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stagpoly {

using Point2 = Eigen::Vector2d;
using Vector2 = Eigen::Vector2d;

inline double cross(const Vector2& a, const Vector2& b)
{
    return a.x() * b.y() - a.y() * b.x();
}

/// Twice the signed area of triangle (a, b, c); positive when counter-clockwise.
inline double orient2d(const Point2& a, const Point2& b, const Point2& c)
{
    return cross(b - a, c - a);
}

inline double triangle_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * orient2d(a, b, c);
}

/// Rotation by +90 degrees.
inline Vector2 rotate_ccw(const Vector2& v)
{
    return {-v.y(), v.x()};
}

/// Rotation by -90 degrees; for a counter-clockwise edge a->b this maps the
/// edge direction to the outward normal.
inline Vector2 rotate_cw(const Vector2& v)
{
    return {v.y(), -v.x()};
}

inline double signed_area(std::span<const Point2> loop)
{
    double twice = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t i = 0; i < n; ++i)
        twice += cross(loop[i], loop[(i + 1) % n]);
    return 0.5 * twice;
}

/// Area centroid of a simple polygon, computed relative to the first vertex
/// to limit cancellation.
inline Point2 area_centroid(std::span<const Point2> loop)
{
    const Point2 origin = loop.front();
    double area = 0.0;
    Vector2 moment = Vector2::Zero();
    for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
        const double a = triangle_area(origin, loop[i], loop[i + 1]);
        area += a;
        moment += a * (origin + loop[i] + loop[i + 1]) / 3.0;
    }
    return moment / area;
}

inline Point2 vertex_average(std::span<const Point2> loop)
{
    Point2 sum = Point2::Zero();
    for (const auto& p : loop)
        sum += p;
    return sum / static_cast<double>(loop.size());
}

inline double diameter(std::span<const Point2> loop)
{
    double d = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
        for (std::size_t j = i + 1; j < loop.size(); ++j)
            d = std::max(d, (loop[i] - loop[j]).norm());
    return d;
}

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b)
{
    const Vector2 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

/// Proper or touching intersection test for closed segments [a,b] and [c,d].
inline bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d)
{
    const double d1 = orient2d(c, d, a);
    const double d2 = orient2d(c, d, b);
    const double d3 = orient2d(a, b, c);
    const double d4 = orient2d(a, b, d);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](const Point2& p, const Point2& q, const Point2& r) {
        return std::min(p.x(), q.x()) <= r.x() && r.x() <= std::max(p.x(), q.x())
            && std::min(p.y(), q.y()) <= r.y() && r.y() <= std::max(p.y(), q.y());
    };
    if (d1 == 0 && on_segment(c, d, a)) return true;
    if (d2 == 0 && on_segment(c, d, b)) return true;
    if (d3 == 0 && on_segment(a, b, c)) return true;
    if (d4 == 0 && on_segment(a, b, d)) return true;
    return false;
}

/// Non-adjacent edges of the loop must not touch.
inline bool is_simple_polygon(std::span<const Point2> loop)
{
    const std::size_t n = loop.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_intersect(loop[i], loop[(i + 1) % n], loop[j], loop[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

inline bool is_convex_polygon(std::span<const Point2> loop, double rel_tol = 1e-12)
{
    const std::size_t n = loop.size();
    const double scale = diameter(loop);
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = loop[i];
        const Point2& b = loop[(i + 1) % n];
        const Point2& c = loop[(i + 2) % n];
        if (orient2d(a, b, c) < -rel_tol * scale * scale)
            return false;
    }
    return true;
}

} // namespace stagpoly
