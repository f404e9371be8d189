#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "basis.hpp"
#include "coefficient.hpp"
#include "polymesh.hpp"
#include "quadrature.hpp"
#include "subtriangulation.hpp"
#include "weakgrad.hpp"

namespace stagpoly {

using GradFn = std::function<Vector2(const Point2&)>;

/// Discrete solution {u_0 per cell, u_b per face}.
struct SolutionField {
    DofMap dofs;
    Eigen::VectorXd coeffs;

    int degree() const { return dofs.degree(); }

    Eigen::VectorXd local(const PolyMesh& mesh, int cell) const
    {
        const auto map = dofs.local_to_global(mesh, cell);
        Eigen::VectorXd u(static_cast<Eigen::Index>(map.size()));
        for (std::size_t i = 0; i < map.size(); ++i)
            u[static_cast<Eigen::Index>(i)] = coeffs[map[i]];
        return u;
    }

    Eigen::VectorXd cell_coeffs(int cell) const
    {
        return coeffs.segment(dofs.cell_offset(cell), dofs.cell_dim());
    }

    Eigen::VectorXd face_coeffs(int edge) const { return coeffs.segment(dofs.face_offset(edge), dofs.face_dim()); }
};

/// Sign convention of a recovered flux: `potential` is K grad_w u (grad_w u for
/// K = I), `darcy` is -K grad_w u.
enum class FluxSign { potential, darcy };

/// Piecewise P_k flux on the fan sub-triangulation, stored per cell in the
/// FluxBasis coefficients.
struct FluxField {
    int k = 0;
    FluxSign sign = FluxSign::potential;
    std::vector<Eigen::VectorXd> cells;

    /// Value on fan triangle `tri` of `cell` at x (same layout as FluxBasis).
    Vector2 value(const SubTriangulation& sub, int cell, int tri, const Point2& x) const
    {
        const CellGeometry& g = sub.cells[cell];
        const FanTriangle& t = sub.triangles[g.first + tri];
        const int m = dim_pk(k);
        const Eigen::VectorXd s = ScaledMonomials(k, t.centroid, g.scale).eval(x);
        const Eigen::VectorXd& c = cells[cell];
        double cn = 0.0, ct = 0.0;
        for (int p = 0; p < m; ++p) {
            cn += c[tri * m + p] * s[p];
            ct += c[(g.count + tri) * m + p] * s[p];
        }
        return cn * t.normal + ct * t.tangent;
    }
};

inline FluxField recover_flux(const PolyMesh& mesh, const SubTriangulation& sub, const SolutionField& u,
                              const CoefficientField& coeff, FluxSign sign = FluxSign::potential)
{
    FluxField flux;
    flux.k = u.degree();
    flux.sign = sign;
    flux.cells.resize(mesh.cells.size());
    const double s = sign == FluxSign::potential ? 1.0 : -1.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const ElementOperator op = element_operator(mesh, sub, c, flux.k, coeff);
        flux.cells[c] = s * weak_gradient_coeffs(op, u.local(mesh, c));
    }
    return flux;
}

enum class NormQuadrature {
    midpoint,   // edge midpoints of each fan triangle; primal face midpoints
    high_order, // degree-6 triangle rule; 4-point Gauss on faces
    cubic,      // four-point degree-3 triangle rule; 2-point Gauss on faces
};

inline QuadRule norm_triangle_rule(NormQuadrature mode)
{
    switch (mode) {
    case NormQuadrature::midpoint: return triangle_rule(2);
    case NormQuadrature::high_order: return triangle_rule(6);
    case NormQuadrature::cubic: return cubic_triangle_rule();
    }
    return triangle_rule(2);
}

inline QuadRule norm_edge_rule(NormQuadrature mode)
{
    switch (mode) {
    case NormQuadrature::midpoint: return edge_rule(1);
    case NormQuadrature::high_order: return edge_rule(4);
    case NormQuadrature::cubic: return edge_rule(2);
    }
    return edge_rule(1);
}

struct ErrorNorms {
    double energy = 0.0;      // ||u - u_h||_{1,h} with the jump Q_b u_0 - u_b
    double l2 = 0.0;          // ||u - u_0||
    double flux_0h = 0.0;     // ||sigma - sigma_h||_{0,h}
    double flux_l2 = 0.0;     // ||sigma - sigma_h||
    double cr_l2 = 0.0;       // ||u - E_h u_h|| on the fan (k = 0 only)
};

/// Error norms against an exact solution. The flux is compared with
/// sign * grad u, so it must be recovered with K = I for these norms to be the
/// usual ones.
inline ErrorNorms error_norms(const PolyMesh& mesh, const SubTriangulation& sub, const SolutionField& u,
                              const FluxField& flux, const ScalarFn& exact, const GradFn& exact_grad,
                              NormQuadrature mode = NormQuadrature::midpoint)
{
    const int k = u.degree();
    const QuadRule tri_rule = norm_triangle_rule(mode);
    const QuadRule seg_rule = norm_edge_rule(mode);
    const double s = flux.sign == FluxSign::potential ? 1.0 : -1.0;
    double energy = 0.0, l2 = 0.0, flux0h = 0.0, fluxl2 = 0.0, cr = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const CellGeometry& g = sub.cells[c];
        const ScaledMonomials cb = cell_basis(sub, c, k);
        const Eigen::VectorXd u0 = u.cell_coeffs(c);
        const auto fan = sub.fan(c);
        for (int i = 0; i < static_cast<int>(fan.size()); ++i) {
            const FanTriangle& t = fan[i];
            const FaceBasis fb = face_basis(mesh, t.edge, k);
            const Eigen::VectorXd ub = u.face_coeffs(t.edge);
            // k = 0: E_h u_h is the P1 function on T with value u_b at the primal
            // midpoint and u_0 at the midpoints of the two star edges
            const double cr_vals[3] = {k == 0 ? ub[0] : 0.0, cb.eval(0.5 * (t.b + g.star)).dot(u0),
                                       cb.eval(0.5 * (g.star + t.a)).dot(u0)};
            for (const auto& qp : map_to_triangle(tri_rule, g.star, t.a, t.b)) {
                const double e0 = exact(qp.x) - cb.eval(qp.x).dot(u0);
                const Vector2 grad_u = exact_grad(qp.x);
                const Vector2 grad_u0 = cb.grad(qp.x).transpose() * u0;
                const Vector2 ef = s * grad_u - flux.value(sub, c, i, qp.x);
                l2 += qp.w * e0 * e0;
                energy += qp.w * (grad_u - grad_u0).squaredNorm();
                fluxl2 += qp.w * ef.squaredNorm();
                if (k == 0) {
                    // barycentric coordinates w.r.t. (star, a, b); vertex v is opposite value v
                    const double l_star = triangle_area(qp.x, t.a, t.b) / t.area;
                    const double l_a = triangle_area(g.star, qp.x, t.b) / t.area;
                    const double l_b = 1.0 - l_star - l_a;
                    const double w = cr_vals[0] * (1.0 - 2.0 * l_star) + cr_vals[1] * (1.0 - 2.0 * l_a)
                                     + cr_vals[2] * (1.0 - 2.0 * l_b);
                    const double e = exact(qp.x) - w;
                    cr += qp.w * e * e;
                }
            }
            // Q_b u_0 - u_b, with Q_b the L2 projection onto P_k(F)
            const Eigen::VectorXd qb_u0 = face_projection(
                mesh, t.edge, k, [&](const Point2& x) { return cb.eval(x).dot(u0); }, k + 1);
            const Eigen::VectorXd jump_coeffs = qb_u0 - ub;
            for (const auto& qp : map_to_segment(seg_rule, t.a, t.b)) {
                const double jump = fb.eval(qp.x).dot(jump_coeffs);
                const double en = (s * exact_grad(qp.x) - flux.value(sub, c, i, qp.x)).dot(t.normal);
                energy += qp.w * jump * jump / g.scale;
                flux0h += qp.w * g.scale * en * en;
            }
        }
    }
    ErrorNorms out;
    out.energy = std::sqrt(energy);
    out.l2 = std::sqrt(l2);
    out.flux_l2 = std::sqrt(fluxl2);
    out.flux_0h = std::sqrt(fluxl2 + flux0h);
    out.cr_l2 = std::sqrt(cr);
    return out;
}

/// Integral of the outward normal flux over the boundary of `cell`, using the
/// trace from the cell's own fan triangles.
inline double boundary_flux(const SubTriangulation& sub, const FluxField& flux, int cell)
{
    const QuadRule rule = edge_rule(flux.k + 1);
    double total = 0.0;
    const auto fan = sub.fan(cell);
    for (int i = 0; i < static_cast<int>(fan.size()); ++i)
        for (const auto& qp : map_to_segment(rule, fan[i].a, fan[i].b))
            total += qp.w * flux.value(sub, cell, i, qp.x).dot(fan[i].normal);
    return total;
}

struct ConservationReport {
    std::vector<double> residuals; // per cell, divided by |K|
    double max_abs = 0.0;
};

/// Per-cell residual (int_K f - int_dK sigma.n)/|K| for a Darcy flux, and
/// (int_K f + int_dK sigma.n)/|K| for a potential flux; both vanish for the
/// discrete solution.
inline ConservationReport conservation_residuals(const PolyMesh& mesh, const SubTriangulation& sub,
                                                 const FluxField& flux, const ScalarFn& f)
{
    ConservationReport report;
    report.residuals.resize(mesh.cells.size());
    const double s = flux.sign == FluxSign::darcy ? -1.0 : 1.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const double source = cell_load(sub, c, flux.k, f)[0];
        const double r = (source + s * boundary_flux(sub, flux, c)) / sub.cells[c].area;
        report.residuals[c] = r;
        report.max_abs = std::max(report.max_abs, std::abs(r));
    }
    return report;
}

inline void write_conservation_report(std::ostream& os, const ConservationReport& report)
{
    os << "# local conservation residual (int_K f - int_dK sigma.n)/|K|\n";
    os << "max_abs " << std::scientific << report.max_abs << '\n';
    os << "# cell residual\n";
    for (std::size_t c = 0; c < report.residuals.size(); ++c)
        os << c << ' ' << report.residuals[c] << '\n';
    os << std::defaultfloat;
}

/// Largest P_k moment of the normal-flux jump over interior primal faces,
/// max_F max_j |<[sigma.n], phi_j>_F| / (|F| * max|sigma|).
inline double max_flux_jump(const PolyMesh& mesh, const SubTriangulation& sub, const FluxField& flux)
{
    const QuadRule rule = edge_rule(flux.k + 1);
    double sigma_max = 0.0;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto fan = sub.fan(c);
        for (int i = 0; i < static_cast<int>(fan.size()); ++i)
            sigma_max = std::max(sigma_max, flux.value(sub, c, i, fan[i].centroid).norm());
    }
    if (sigma_max == 0.0) return 0.0;
    double worst = 0.0;
    for (int e = 0; e < mesh.num_edges(); ++e) {
        if (mesh.edges[e].is_boundary()) continue;
        const FaceBasis fb = face_basis(mesh, e, flux.k);
        Eigen::VectorXd moments = Eigen::VectorXd::Zero(fb.dim());
        double length = 0.0;
        for (int side = 0; side < 2; ++side) {
            const FanTriangle& t = sub.triangles[sub.edge_triangles[e][side]];
            const int local = sub.edge_triangles[e][side] - sub.cells[t.cell].first;
            length = t.length;
            for (const auto& qp : map_to_segment(rule, t.a, t.b))
                moments += qp.w * flux.value(sub, t.cell, local, qp.x).dot(t.normal) * fb.eval(qp.x);
        }
        worst = std::max(worst, moments.cwiseAbs().maxCoeff() / (length * sigma_max));
    }
    return worst;
}

} // namespace stagpoly
