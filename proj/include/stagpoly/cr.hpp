#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "assembly.hpp"
#include "basis.hpp"
#include "coefficient.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "polymesh.hpp"
#include "subtriangulation.hpp"
#include "weakgrad.hpp"

namespace stagpoly {

/// Crouzeix-Raviart space on the fan refinement of a triangle mesh. DoFs are
/// indexed primal edges first, then the three star-to-vertex edges of each
/// cell (3c + j is the edge from the star of c to its j-th vertex).
struct CrSpace {
    int num_primal = 0;
    int num_interior = 0;
    int size() const { return num_primal + num_interior; }
    int interior(int cell, int vertex) const { return num_primal + 3 * cell + vertex; }
};

inline double inf_norm(const SparseMatrix& A)
{
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int j = 0; j < A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(A, j); it; ++it)
            rows[it.row()] += std::abs(it.value());
    return A.rows() ? rows.maxCoeff() : 0.0;
}

/// P1-nonconforming stiffness on the fan triangles, 4|T| grad(l_i).grad(l_j)
/// for the edge functions 1 - 2 l_i.
inline SparseMatrix cr_stiffness(const PolyMesh& mesh, const SubTriangulation& sub, const CrSpace& space)
{
    std::vector<Eigen::Triplet<double>> trips;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto fan = sub.fan(c);
        const int n = static_cast<int>(fan.size());
        for (int i = 0; i < n; ++i) {
            const FanTriangle& t = fan[i];
            const Point2 p[3] = {sub.cells[c].star, t.a, t.b};
            // DoF on the edge opposite each vertex
            const int dof[3] = {t.edge, space.interior(c, (i + 1) % n), space.interior(c, i)};
            const double area = t.area;
            Eigen::Matrix<double, 3, 2> grads;
            for (int v = 0; v < 3; ++v) {
                const Vector2 opp = p[(v + 2) % 3] - p[(v + 1) % 3];
                grads.row(v) = rotate_ccw(opp).transpose() / (2.0 * area); // inward normal of the opposite edge
            }
            const Eigen::Matrix3d local = 4.0 * area * grads * grads.transpose();
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    trips.emplace_back(dof[a], dof[b], local(a, b));
        }
    }
    SparseMatrix A(space.size(), space.size());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

/// E_h in closed form: primal-edge values are u_b, interior-edge values are u_0
/// at the edge midpoint.
inline SparseMatrix cr_connection(const PolyMesh& mesh, const SubTriangulation& sub, const DofMap& dofs,
                                  const CrSpace& space)
{
    std::vector<Eigen::Triplet<double>> trips;
    for (int e = 0; e < mesh.num_edges(); ++e)
        trips.emplace_back(e, dofs.face_offset(e), 1.0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const ScaledMonomials cb = cell_basis(sub, c, 0);
        const auto& loop = mesh.cells[c];
        for (int j = 0; j < static_cast<int>(loop.size()); ++j) {
            const Point2 mid = 0.5 * (sub.cells[c].star + mesh.vertices[loop[j]]);
            const Eigen::VectorXd phi = cb.eval(mid);
            for (int p = 0; p < cb.dim(); ++p)
                trips.emplace_back(space.interior(c, j), dofs.cell_offset(c) + p, phi[p]);
        }
    }
    SparseMatrix E(space.size(), dofs.total());
    E.setFromTriplets(trips.begin(), trips.end());
    return E;
}

struct CrReport {
    double discrepancy = 0.0; // ||A_WG - E^T A_CR E||_inf / ||A_CR||_inf
    double wg_norm = 0.0;
    double cr_norm = 0.0;
    int wg_dofs = 0;
    int cr_dofs = 0;
};

/// Compares the k = 0 weak Galerkin matrix (K = I, before boundary conditions)
/// with the Crouzeix-Raviart matrix on the fan refinement.
inline CrReport cr_equivalence(const PolyMesh& mesh, const SubTriangulation& sub)
{
    if (!mesh.all_triangles()) fail(ErrorKind::capability, "CR equivalence needs a mesh of triangles");
    const DofMap dofs = build_dof_map(mesh, 0);
    std::vector<Eigen::Triplet<double>> trips;
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Eigen::MatrixXd A = local_stiffness(mesh, sub, c, 0, CoefficientField::identity());
        const auto map = dofs.local_to_global(mesh, c);
        for (std::size_t i = 0; i < map.size(); ++i)
            for (std::size_t j = 0; j < map.size(); ++j)
                trips.emplace_back(map[i], map[j], A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    SparseMatrix A_wg(dofs.total(), dofs.total());
    A_wg.setFromTriplets(trips.begin(), trips.end());

    const CrSpace space{mesh.num_edges(), 3 * mesh.num_cells()};
    const SparseMatrix A_cr = cr_stiffness(mesh, sub, space);
    const SparseMatrix E = cr_connection(mesh, sub, dofs, space);
    const SparseMatrix pulled = SparseMatrix(E.transpose()) * A_cr * E;

    CrReport report;
    report.wg_dofs = dofs.total();
    report.cr_dofs = space.size();
    report.wg_norm = inf_norm(A_wg);
    report.cr_norm = inf_norm(A_cr);
    report.discrepancy = inf_norm(SparseMatrix(A_wg - pulled)) / report.cr_norm;
    return report;
}

inline CrReport cr_equivalence(const PolyMesh& mesh)
{
    if (!mesh.all_triangles()) fail(ErrorKind::capability, "CR equivalence needs a mesh of triangles");
    return cr_equivalence(mesh, build_subtriangulation(mesh));
}

} // namespace stagpoly
