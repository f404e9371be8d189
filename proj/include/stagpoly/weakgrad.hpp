#pragma once

#include <algorithm>
#include <functional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "basis.hpp"
#include "coefficient.hpp"
#include "error.hpp"
#include "polymesh.hpp"
#include "quadrature.hpp"
#include "subtriangulation.hpp"

namespace stagpoly {

/// Local element matrices of one cell. Local DoFs are ordered
/// [face DoFs in fan order, (k+1) per face | cell DoFs, dim P_{k+1}].
struct ElementOperator {
    int cell = -1;
    int k = 0;
    Eigen::MatrixXd M;   // K^{-1}-weighted Gram matrix of the flux basis
    Eigen::MatrixXd Db;  // flux moments of the face basis
    Eigen::MatrixXd D0;  // flux moments of the cell basis
    Eigen::MatrixXd A;   // [Db, D0]^T M^{-1} [Db, D0]
    Eigen::LLT<Eigen::MatrixXd> chol;

    int num_face_dofs() const { return static_cast<int>(Db.cols()); }
    int num_cell_dofs() const { return static_cast<int>(D0.cols()); }
    int num_local_dofs() const { return num_face_dofs() + num_cell_dofs(); }

    Eigen::MatrixXd coupling() const
    {
        Eigen::MatrixXd B(Db.rows(), Db.cols() + D0.cols());
        B << Db, D0;
        return B;
    }
};

inline Eigen::MatrixXd local_mass(const SubTriangulation& sub, int cell, int k, const CoefficientField& coeff,
                                  double tangent_sign = 1.0)
{
    const FluxBasis basis(sub, cell, k, tangent_sign);
    const int m = basis.scalar_dim();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.dim(), basis.dim());
    const QuadRule rule = triangle_rule(2 * k + 2);
    const Point2& star = sub.cells[cell].star;
    for (int i = 0; i < basis.num_triangles(); ++i) {
        const FanTriangle& t = basis.triangle(i);
        auto accumulate = [&](const Eigen::Matrix2d& kinv, const Eigen::MatrixXd& gram) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const double frame = basis.frame(a, i).dot(kinv * basis.frame(b, i));
                    for (int p = 0; p < m; ++p)
                        for (int q = 0; q < m; ++q)
                            M(basis.index(a, i, p), basis.index(b, i, q)) += frame * gram(p, q);
                }
        };
        if (coeff.is_cell_constant()) {
            const Eigen::Matrix2d kinv = coeff.inverse_at(t.centroid, cell);
            Eigen::MatrixXd gram(m, m);
            if (k == 0) {
                gram(0, 0) = t.area;
            } else {
                gram.setZero();
                for (const auto& qp : map_to_triangle(rule, star, t.a, t.b)) {
                    const Eigen::VectorXd s = basis.scalars(i).eval(qp.x);
                    gram.noalias() += qp.w * s * s.transpose();
                }
            }
            accumulate(kinv, gram);
        } else {
            for (const auto& qp : map_to_triangle(rule, star, t.a, t.b)) {
                const Eigen::VectorXd s = basis.scalars(i).eval(qp.x);
                accumulate(coeff.inverse_at(qp.x, cell), qp.w * s * s.transpose());
            }
        }
    }
    return M;
}

/// Right-hand side of the weak-gradient definition tested against every flux
/// basis function: columns of Db for u_b = face basis functions, columns of D0
/// for u_0 = cell basis functions, i.e. (grad u_0, zeta)_K + <u_b - u_0, zeta.n>_dK.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> local_db_d0(const PolyMesh& mesh, const SubTriangulation& sub,
                                                               int cell, int k, double tangent_sign = 1.0)
{
    const FluxBasis basis(sub, cell, k, tangent_sign);
    const ScaledMonomials cb = cell_basis(sub, cell, k);
    const int n = basis.num_triangles();
    const int m = basis.scalar_dim();
    const int nb = k + 1;
    Eigen::MatrixXd Db = Eigen::MatrixXd::Zero(basis.dim(), n * nb);
    Eigen::MatrixXd D0 = Eigen::MatrixXd::Zero(basis.dim(), cb.dim());
    const QuadRule tri_rule = triangle_rule(2 * k + 2);
    const QuadRule seg_rule = edge_rule(k + 1);
    const Point2& star = sub.cells[cell].star;
    for (int i = 0; i < n; ++i) {
        const FanTriangle& t = basis.triangle(i);
        const FaceBasis fb = face_basis(mesh, t.edge, k);
        for (const auto& qp : map_to_segment(seg_rule, t.a, t.b)) {
            const Eigen::VectorXd s = basis.scalars(i).eval(qp.x);
            const Eigen::VectorXd phib = fb.eval(qp.x);
            const Eigen::VectorXd phi0 = cb.eval(qp.x);
            for (int p = 0; p < m; ++p) {
                const int row = basis.index(0, i, p);
                for (int j = 0; j < nb; ++j)
                    Db(row, i * nb + j) += qp.w * phib[j] * s[p];
                for (int c = 0; c < cb.dim(); ++c)
                    D0(row, c) -= qp.w * phi0[c] * s[p];
            }
        }
        for (const auto& qp : map_to_triangle(tri_rule, star, t.a, t.b)) {
            const Eigen::VectorXd s = basis.scalars(i).eval(qp.x);
            const auto g = cb.grad(qp.x);
            for (int block = 0; block < 2; ++block) {
                const Eigen::Vector2d f = basis.frame(block, i);
                for (int p = 0; p < m; ++p) {
                    const int row = basis.index(block, i, p);
                    for (int c = 0; c < cb.dim(); ++c)
                        D0(row, c) += qp.w * s[p] * (g(c, 0) * f.x() + g(c, 1) * f.y());
                }
            }
        }
    }
    return {Db, D0};
}

/// Symmetric product B^T M^{-1} B; entry (i, j) and (j, i) come from one dot product.
inline Eigen::MatrixXd symmetric_stiffness(const Eigen::LLT<Eigen::MatrixXd>& chol, const Eigen::MatrixXd& B)
{
    const Eigen::MatrixXd C = chol.matrixL().solve(B);
    const Eigen::Index nd = B.cols();
    Eigen::MatrixXd A(nd, nd);
    for (Eigen::Index i = 0; i < nd; ++i)
        for (Eigen::Index j = i; j < nd; ++j) {
            const double v = C.col(i).dot(C.col(j));
            A(i, j) = v;
            A(j, i) = v;
        }
    return A;
}

inline ElementOperator element_operator(const PolyMesh& mesh, const SubTriangulation& sub, int cell, int k,
                                        const CoefficientField& coeff, double tangent_sign = 1.0)
{
    if (k < 0) fail(ErrorKind::capability, "polynomial degree must be >= 0");
    const CellGeometry& g = sub.cells[cell];
    for (const auto& t : sub.fan(cell))
        if (!(t.area > degenerate_area_ratio * g.area))
            fail(ErrorKind::degenerate_cell, "cell " + std::to_string(cell) + " has a degenerate fan triangle");
    ElementOperator op;
    op.cell = cell;
    op.k = k;
    op.M = local_mass(sub, cell, k, coeff, tangent_sign);
    std::tie(op.Db, op.D0) = local_db_d0(mesh, sub, cell, k, tangent_sign);
    op.chol.compute(op.M);
    if (op.chol.info() != Eigen::Success)
        fail(ErrorKind::degenerate_cell, "flux mass matrix of cell " + std::to_string(cell) + " is not SPD");
    op.A = symmetric_stiffness(op.chol, op.coupling());
    return op;
}

/// Stiffness A_K alone.
inline Eigen::MatrixXd local_stiffness(const PolyMesh& mesh, const SubTriangulation& sub, int cell, int k,
                                       const CoefficientField& coeff)
{
    return element_operator(mesh, sub, cell, k, coeff).A;
}

/// Coefficients of the (K^{-1}-weighted) weak gradient in the flux basis:
/// M^{-1} [Db, D0] u_local.
inline Eigen::VectorXd weak_gradient_coeffs(const ElementOperator& op, const Eigen::VectorXd& u_local)
{
    if (u_local.size() != op.num_local_dofs())
        fail(ErrorKind::validation, "local DoF vector has wrong length");
    return op.chol.solve(op.Db * u_local.head(op.num_face_dofs()) + op.D0 * u_local.tail(op.num_cell_dofs()));
}

/// Gram matrix of the cell basis over K, integrated on the fan.
inline Eigen::MatrixXd cell_gram(const SubTriangulation& sub, int cell, int k)
{
    const ScaledMonomials cb = cell_basis(sub, cell, k);
    const QuadRule rule = triangle_rule(2 * k + 2);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(cb.dim(), cb.dim());
    for (const auto& t : sub.fan(cell))
        for (const auto& qp : map_to_triangle(rule, sub.cells[cell].star, t.a, t.b)) {
            const Eigen::VectorXd v = cb.eval(qp.x);
            G.noalias() += qp.w * v * v.transpose();
        }
    return G;
}

/// Gram matrix of the face basis on one edge.
inline Eigen::MatrixXd face_gram(const FaceBasis& fb, const Point2& a, const Point2& b, int npoints)
{
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(fb.dim(), fb.dim());
    for (const auto& qp : map_to_segment(edge_rule(npoints), a, b)) {
        const Eigen::VectorXd v = fb.eval(qp.x);
        G.noalias() += qp.w * v * v.transpose();
    }
    return G;
}

struct WeakDivergence {
    Eigen::VectorXd cell;  // coefficients in the P_{k+1}(K) cell basis
    Eigen::VectorXd faces; // per fan face, (k+1) coefficients of -h_F^{-1} (sigma.n) in the face basis
};

/// Cell-local weak divergence of a flux given by its coefficients in the flux
/// basis (plain L^2 frame). The face part uses the one-sided normal trace from
/// this cell.
inline WeakDivergence weak_divergence(const PolyMesh& mesh, const SubTriangulation& sub, int cell, int k,
                                      const Eigen::VectorXd& sigma, double tangent_sign = 1.0)
{
    const FluxBasis basis(sub, cell, k, tangent_sign);
    if (sigma.size() != basis.dim()) fail(ErrorKind::validation, "flux coefficient vector has wrong length");
    const ScaledMonomials cb = cell_basis(sub, cell, k);
    const int n = basis.num_triangles();
    const int m = basis.scalar_dim();
    const Point2& star = sub.cells[cell].star;
    const QuadRule tri_rule = triangle_rule(2 * k + 2);
    const QuadRule seg_rule = edge_rule(k + 2);

    auto value = [&](int tri, const Point2& x) {
        const Eigen::VectorXd s = basis.scalars(tri).eval(x);
        Vector2 v = Vector2::Zero();
        for (int block = 0; block < 2; ++block)
            for (int p = 0; p < m; ++p)
                v += sigma[basis.index(block, tri, p)] * s[p] * basis.frame(block, tri);
        return v;
    };
    auto divergence = [&](int tri, const Point2& x) {
        const auto g = basis.scalars(tri).grad(x);
        double d = 0.0;
        for (int block = 0; block < 2; ++block) {
            const Vector2 f = basis.frame(block, tri);
            for (int p = 0; p < m; ++p)
                d += sigma[basis.index(block, tri, p)] * (g(p, 0) * f.x() + g(p, 1) * f.y());
        }
        return d;
    };

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(cb.dim());
    for (int i = 0; i < n; ++i) {
        const FanTriangle& t = basis.triangle(i);
        for (const auto& qp : map_to_triangle(tri_rule, star, t.a, t.b))
            rhs += qp.w * divergence(i, qp.x) * cb.eval(qp.x);
        // interior fan edge between T_i and T_{i+1}: from t.b to the star point
        const int next = (i + 1) % n;
        const Vector2 n_i = rotate_cw(star - t.b).normalized();
        for (const auto& qp : map_to_segment(seg_rule, t.b, star)) {
            const double jump = value(i, qp.x).dot(n_i) + value(next, qp.x).dot(-n_i);
            rhs -= qp.w * jump * cb.eval(qp.x);
        }
    }
    WeakDivergence out;
    out.cell = cell_gram(sub, cell, k).llt().solve(rhs);
    out.faces.resize(n * (k + 1));
    for (int i = 0; i < n; ++i) {
        const FanTriangle& t = basis.triangle(i);
        const FaceBasis fb = face_basis(mesh, t.edge, k);
        Eigen::VectorXd moments = Eigen::VectorXd::Zero(k + 1);
        for (const auto& qp : map_to_segment(seg_rule, t.a, t.b))
            moments += qp.w * (-value(i, qp.x).dot(t.normal) / t.length) * fb.eval(qp.x);
        out.faces.segment(i * (k + 1), k + 1) = face_gram(fb, t.a, t.b, k + 2).llt().solve(moments);
    }
    return out;
}

/// L^2 projection of a trace onto P_k(F) for edge `edge`, integrated with an
/// `npoints` Gauss rule (default: the finest available rule).
inline Eigen::VectorXd face_projection(const PolyMesh& mesh, int edge, int k,
                                       const std::function<double(const Point2&)>& trace, int npoints = 0)
{
    if (npoints <= 0) npoints = std::max(max_edge_points, k + 2);
    const Edge& e = mesh.edges[edge];
    const Point2& a = mesh.vertices[e.v[0]];
    const Point2& b = mesh.vertices[e.v[1]];
    const FaceBasis fb(k, a, b);
    Eigen::VectorXd moments = Eigen::VectorXd::Zero(fb.dim());
    for (const auto& qp : map_to_segment(edge_rule(npoints), a, b))
        moments += qp.w * trace(qp.x) * fb.eval(qp.x);
    return face_gram(fb, a, b, npoints).llt().solve(moments);
}

/// Plain-text dump of an element operator for cross-checking with other tools.
inline void write_element_operator(std::ostream& os, const ElementOperator& op)
{
    const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, " ", "\n");
    auto block = [&](const char* name, const Eigen::MatrixXd& mat) {
        os << name << ' ' << mat.rows() << ' ' << mat.cols() << '\n' << mat.format(fmt) << '\n';
    };
    os << "cell " << op.cell << " k " << op.k << '\n';
    block("M", op.M);
    block("Db", op.Db);
    block("D0", op.D0);
    block("A", op.A);
}

} // namespace stagpoly
