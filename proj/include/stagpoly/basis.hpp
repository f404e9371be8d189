#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "geometry.hpp"
#include "polymesh.hpp"
#include "subtriangulation.hpp"

namespace stagpoly {

/// dim P_k in two variables.
constexpr int dim_pk(int k)
{
    return (k + 1) * (k + 2) / 2;
}

/// Exponents (a, b) of x^a y^b with total degree <= k in graded order:
/// 1, x, y, x^2, xy, y^2, ...
inline std::vector<std::array<int, 2>> monomial_exponents(int k)
{
    std::vector<std::array<int, 2>> exps;
    exps.reserve(dim_pk(k));
    for (int total = 0; total <= k; ++total)
        for (int a = total; a >= 0; --a)
            exps.push_back({a, total - a});
    return exps;
}

namespace detail {

inline double ipow(double x, int n)
{
    double r = 1.0;
    for (int i = 0; i < n; ++i)
        r *= x;
    return r;
}

} // namespace detail

/// Scaled monomials ((x - shift)/scale)^a ((y - shift)/scale)^b of total degree <= degree.
class ScaledMonomials {
public:
    ScaledMonomials() = default;
    ScaledMonomials(int degree, Point2 shift, double scale)
        : degree_(degree), shift_(std::move(shift)), scale_(scale), exps_(monomial_exponents(degree))
    {}

    int degree() const { return degree_; }
    int dim() const { return static_cast<int>(exps_.size()); }
    const Point2& shift() const { return shift_; }
    double scale() const { return scale_; }
    const std::vector<std::array<int, 2>>& exponents() const { return exps_; }

    Eigen::VectorXd eval(const Point2& x) const
    {
        const Vector2 s = (x - shift_) / scale_;
        Eigen::VectorXd v(dim());
        for (int i = 0; i < dim(); ++i)
            v[i] = detail::ipow(s.x(), exps_[i][0]) * detail::ipow(s.y(), exps_[i][1]);
        return v;
    }

    /// Row i holds the gradient of function i.
    Eigen::Matrix<double, Eigen::Dynamic, 2> grad(const Point2& x) const
    {
        const Vector2 s = (x - shift_) / scale_;
        Eigen::Matrix<double, Eigen::Dynamic, 2> g(dim(), 2);
        for (int i = 0; i < dim(); ++i) {
            const auto [a, b] = exps_[i];
            g(i, 0) = a == 0 ? 0.0 : a * detail::ipow(s.x(), a - 1) * detail::ipow(s.y(), b) / scale_;
            g(i, 1) = b == 0 ? 0.0 : b * detail::ipow(s.x(), a) * detail::ipow(s.y(), b - 1) / scale_;
        }
        return g;
    }

private:
    int degree_ = 0;
    Point2 shift_ = Point2::Zero();
    double scale_ = 1.0;
    std::vector<std::array<int, 2>> exps_;
};

/// Basis of P_{k+1}(K): monomials shifted by the vertex average and scaled by |K|^{1/2}.
inline ScaledMonomials cell_basis(const SubTriangulation& sub, int cell, int k)
{
    const CellGeometry& g = sub.cells[cell];
    return ScaledMonomials(k + 1, g.vertex_average, g.scale);
}

/// Basis of P_k(F) on a straight edge: powers of the arclength coordinate
/// s = (x - midpoint) . d / |F| with d the edge direction in its stored (global)
/// orientation, so both neighbours of an interior edge see the same functions.
class FaceBasis {
public:
    FaceBasis(int degree, Point2 a, Point2 b)
        : degree_(degree), midpoint_(0.5 * (a + b)), length_((b - a).norm()), direction_((b - a) / (b - a).norm())
    {}

    int degree() const { return degree_; }
    int dim() const { return degree_ + 1; }
    double length() const { return length_; }
    const Point2& midpoint() const { return midpoint_; }

    Eigen::VectorXd eval(const Point2& x) const
    {
        const double s = (x - midpoint_).dot(direction_) / length_;
        Eigen::VectorXd v(dim());
        double p = 1.0;
        for (int j = 0; j < dim(); ++j) {
            v[j] = p;
            p *= s;
        }
        return v;
    }

private:
    int degree_;
    Point2 midpoint_;
    double length_;
    Vector2 direction_;
};

inline FaceBasis face_basis(const PolyMesh& mesh, int edge, int k)
{
    const Edge& e = mesh.edges[edge];
    return FaceBasis(k, mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]);
}

/// Piecewise P_k vector basis on the fan of one cell. Function index
/// j = block * (n * m) + i * m + p, with block 0 the normal frame vector n_i,
/// block 1 the tangent t_i, i the fan triangle, p the scalar monomial on T_i
/// (shifted by the centroid of T_i, scaled by h_K), n the fan size and m = dim P_k.
class FluxBasis {
public:
    FluxBasis(const SubTriangulation& sub, int cell, int k, double tangent_sign = 1.0)
        : k_(k), m_(dim_pk(k)), fan_(sub.fan(cell)), scale_(sub.cells[cell].scale), tangent_sign_(tangent_sign)
    {
        scalars_.reserve(fan_.size());
        for (const auto& t : fan_)
            scalars_.emplace_back(k, t.centroid, scale_);
    }

    int degree() const { return k_; }
    int scalar_dim() const { return m_; }
    int num_triangles() const { return static_cast<int>(fan_.size()); }
    int dim() const { return 2 * num_triangles() * m_; }

    int index(int block, int tri, int p) const { return block * num_triangles() * m_ + tri * m_ + p; }
    int home_triangle(int j) const { return (j % (num_triangles() * m_)) / m_; }

    Vector2 frame(int block, int tri) const
    {
        return block == 0 ? fan_[tri].normal : Vector2(tangent_sign_ * fan_[tri].tangent);
    }

    const ScaledMonomials& scalars(int tri) const { return scalars_[tri]; }
    const FanTriangle& triangle(int tri) const { return fan_[tri]; }
    double tangent_sign() const { return tangent_sign_; }

    /// Values of all functions at a point of fan triangle `tri` (2 x dim).
    Eigen::Matrix<double, 2, Eigen::Dynamic> eval_on(int tri, const Point2& x) const
    {
        Eigen::Matrix<double, 2, Eigen::Dynamic> v = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, dim());
        const Eigen::VectorXd s = scalars_[tri].eval(x);
        for (int block = 0; block < 2; ++block) {
            const Vector2 f = frame(block, tri);
            for (int p = 0; p < m_; ++p)
                v.col(index(block, tri, p)) = s[p] * f;
        }
        return v;
    }

    /// Fan triangle containing x (closed), or -1 when x lies outside the cell.
    int locate(const Point2& x, const Point2& star) const
    {
        for (int i = 0; i < num_triangles(); ++i) {
            const auto& t = fan_[i];
            const double tol = -1e-14 * t.area;
            if (triangle_area(star, t.a, x) >= tol && triangle_area(t.a, t.b, x) >= tol
                && triangle_area(t.b, star, x) >= tol)
                return i;
        }
        return -1;
    }

private:
    int k_;
    int m_;
    std::span<const FanTriangle> fan_;
    double scale_;
    double tangent_sign_;
    std::vector<ScaledMonomials> scalars_;
};

} // namespace stagpoly
