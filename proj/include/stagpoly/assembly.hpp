#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "basis.hpp"
#include "coefficient.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "polymesh.hpp"
#include "quadrature.hpp"
#include "subtriangulation.hpp"
#include "weakgrad.hpp"

namespace stagpoly {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarFn = std::function<double(const Point2&)>;

/// Global numbering: all face DoFs first (by edge index), then cell DoFs (by cell index).
class DofMap {
public:
    DofMap() = default;
    DofMap(const PolyMesh& mesh, int k)
        : k_(k), num_faces_(mesh.num_edges()), num_cells_(mesh.num_cells()), cell_dim_(dim_pk(k + 1))
    {
        if (k < 0) fail(ErrorKind::capability, "polynomial degree must be >= 0");
        for (int e = 0; e < mesh.num_edges(); ++e) {
            const Edge& edge = mesh.edges[e];
            if (!edge.is_boundary()) continue;
            auto& dofs = boundary_[edge.marker];
            for (int j = 0; j <= k; ++j)
                dofs.push_back(face_offset(e) + j);
        }
    }

    int degree() const { return k_; }
    int face_dim() const { return k_ + 1; }
    int cell_dim() const { return cell_dim_; }
    int num_face_dofs() const { return num_faces_ * face_dim(); }
    int num_cell_dofs() const { return num_cells_ * cell_dim_; }
    int total() const { return num_face_dofs() + num_cell_dofs(); }
    int face_offset(int edge) const { return edge * face_dim(); }
    int cell_offset(int cell) const { return num_face_dofs() + cell * cell_dim_; }

    /// Boundary face DoFs grouped by boundary marker.
    const std::map<int, std::vector<int>>& boundary_dofs() const { return boundary_; }

    /// Global indices of the local DoFs of `cell` ([fan faces | cell]).
    std::vector<int> local_to_global(const PolyMesh& mesh, int cell) const
    {
        std::vector<int> map;
        map.reserve(mesh.cell_edges[cell].size() * face_dim() + cell_dim_);
        for (int e : mesh.cell_edges[cell])
            for (int j = 0; j < face_dim(); ++j)
                map.push_back(face_offset(e) + j);
        for (int j = 0; j < cell_dim_; ++j)
            map.push_back(cell_offset(cell) + j);
        return map;
    }

private:
    int k_ = 0;
    int num_faces_ = 0;
    int num_cells_ = 0;
    int cell_dim_ = 0;
    std::map<int, std::vector<int>> boundary_;
};

inline DofMap build_dof_map(const PolyMesh& mesh, int k)
{
    return DofMap(mesh, k);
}

/// Boundary conditions keyed by boundary marker.
struct BoundaryCondition {
    enum class Type { dirichlet, neumann };
    Type type = Type::dirichlet;
    /// Dirichlet value g, or Neumann flux g_N = (K grad u).n with n the outward
    /// normal; empty means homogeneous.
    ScalarFn value;
};

class BoundarySpec {
public:
    BoundarySpec() : fallback_(BoundaryCondition{}) {}

    static BoundarySpec dirichlet_everywhere(ScalarFn g = {})
    {
        BoundarySpec spec;
        spec.fallback_ = BoundaryCondition{BoundaryCondition::Type::dirichlet, std::move(g)};
        return spec;
    }

    BoundarySpec& dirichlet(int tag, ScalarFn g = {})
    {
        entries_.emplace_back(tag, BoundaryCondition{BoundaryCondition::Type::dirichlet, std::move(g)});
        return *this;
    }

    BoundarySpec& neumann(int tag, ScalarFn g = {})
    {
        entries_.emplace_back(tag, BoundaryCondition{BoundaryCondition::Type::neumann, std::move(g)});
        return *this;
    }

    /// Condition used for markers without an explicit entry; std::nullopt makes
    /// uncovered markers an error.
    BoundarySpec& fallback(std::optional<BoundaryCondition> c)
    {
        fallback_ = std::move(c);
        return *this;
    }

    const BoundaryCondition& for_marker(int tag) const
    {
        const BoundaryCondition* found = nullptr;
        for (const auto& [t, c] : entries_) {
            if (t != tag) continue;
            if (found) fail(ErrorKind::boundary, "boundary marker " + std::to_string(tag) + " has two conditions");
            found = &c;
        }
        if (found) return *found;
        if (fallback_) return *fallback_;
        fail(ErrorKind::boundary, "boundary marker " + std::to_string(tag) + " has no condition");
    }

private:
    std::vector<std::pair<int, BoundaryCondition>> entries_;
    std::optional<BoundaryCondition> fallback_;
};

/// Assembled system before constraint elimination, plus the Dirichlet constraints.
struct GlobalSystem {
    DofMap dofs;
    SparseMatrix A;     // full symmetric matrix, constants in its kernel
    Eigen::VectorXd b;  // load and Neumann terms
    std::map<int, double> constrained; // Dirichlet DoF -> value
};

/// Quadrature for (f, v_0): `standard` is exact to degree 2(k+1) on each fan
/// triangle, `centroid` samples f once per fan triangle.
enum class LoadRule { standard, centroid };

/// Dirichlet face values: the L2 projection Q_b g, or g at the face midpoint.
enum class DirichletData { projection, midpoint };

struct AssemblyOptions {
    unsigned threads = 0;
    LoadRule load = LoadRule::standard;
    DirichletData dirichlet = DirichletData::projection;
};

/// Load vector (f, phi_0)_K on the fan of one cell.
inline Eigen::VectorXd cell_load(const SubTriangulation& sub, int cell, int k, const ScalarFn& f,
                                 LoadRule rule_kind = LoadRule::standard)
{
    const ScaledMonomials cb = cell_basis(sub, cell, k);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(cb.dim());
    if (!f) return load;
    if (rule_kind == LoadRule::centroid) {
        for (const auto& t : sub.fan(cell))
            load += t.area * f(t.centroid) * cb.eval(t.centroid);
        return load;
    }
    const QuadRule rule = triangle_rule(2 * (k + 1));
    for (const auto& t : sub.fan(cell))
        for (const auto& qp : map_to_triangle(rule, sub.cells[cell].star, t.a, t.b))
            load += qp.w * f(qp.x) * cb.eval(qp.x);
    return load;
}

/// Sets the DoFs of boundary face `edge` to the face projection of g (or, with
/// DirichletData::midpoint, to the constant g(midpoint)).
inline void apply_dirichlet(GlobalSystem& system, const PolyMesh& mesh, int edge, const ScalarFn& g,
                            DirichletData mode = DirichletData::projection)
{
    if (!mesh.edges.at(edge).is_boundary())
        fail(ErrorKind::boundary, "Dirichlet condition on interior edge " + std::to_string(edge));
    const int k = system.dofs.degree();
    const int offset = system.dofs.face_offset(edge);
    if (!g) {
        for (int j = 0; j <= k; ++j)
            system.constrained[offset + j] = 0.0;
        return;
    }
    if (mode == DirichletData::midpoint) {
        const Edge& e = mesh.edges[edge];
        system.constrained[offset] = g(0.5 * (mesh.vertices[e.v[0]] + mesh.vertices[e.v[1]]));
        for (int j = 1; j <= k; ++j)
            system.constrained[offset + j] = 0.0;
        return;
    }
    const Eigen::VectorXd values = face_projection(mesh, edge, k, g);
    for (int j = 0; j <= k; ++j)
        system.constrained[offset + j] = values[j];
}

/// Adds <g_N, phi_b>_F to the face rows of boundary edge `edge`.
inline void apply_neumann(GlobalSystem& system, const PolyMesh& mesh, int edge, const ScalarFn& g)
{
    if (!g) return;
    const int k = system.dofs.degree();
    const Edge& e = mesh.edges.at(edge);
    const FaceBasis fb = face_basis(mesh, edge, k);
    const int offset = system.dofs.face_offset(edge);
    for (const auto& qp : map_to_segment(edge_rule(std::max(3, k + 2)), mesh.vertices[e.v[0]], mesh.vertices[e.v[1]]))
        system.b.segment(offset, k + 1) += qp.w * g(qp.x) * fb.eval(qp.x);
}

inline GlobalSystem assemble_system(const PolyMesh& mesh, const SubTriangulation& sub, int k,
                                    const CoefficientField& coeff, const ScalarFn& f, const BoundarySpec& bc,
                                    const AssemblyOptions& options = {})
{
    GlobalSystem system;
    system.dofs = build_dof_map(mesh, k);
    const int ndofs = system.dofs.total();
    system.b = Eigen::VectorXd::Zero(ndofs);

    using Triplet = Eigen::Triplet<double>;
    const std::size_t ncells = static_cast<std::size_t>(mesh.num_cells());
    std::vector<std::vector<Triplet>> buffers(chunk_count(ncells, options.threads));
    parallel_chunks(ncells, options.threads, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& trips = buffers[chunk];
        for (std::size_t c = begin; c < end; ++c) {
            const int cell = static_cast<int>(c);
            const ElementOperator op = element_operator(mesh, sub, cell, k, coeff);
            const std::vector<int> map = system.dofs.local_to_global(mesh, cell);
            for (std::size_t i = 0; i < map.size(); ++i)
                for (std::size_t j = 0; j < map.size(); ++j)
                    trips.emplace_back(map[i], map[j], op.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            // cell rows are owned by this cell alone
            system.b.segment(system.dofs.cell_offset(cell), system.dofs.cell_dim()) = cell_load(sub, cell, k, f, options.load);
        }
    });
    std::vector<Triplet> all;
    std::size_t count = 0;
    for (const auto& buf : buffers)
        count += buf.size();
    all.reserve(count);
    for (auto& buf : buffers)
        all.insert(all.end(), buf.begin(), buf.end());
    system.A.resize(ndofs, ndofs);
    system.A.setFromTriplets(all.begin(), all.end());

    for (int e = 0; e < mesh.num_edges(); ++e) {
        const Edge& edge = mesh.edges[e];
        if (!edge.is_boundary()) continue;
        const BoundaryCondition& cond = bc.for_marker(edge.marker);
        if (cond.type == BoundaryCondition::Type::dirichlet)
            apply_dirichlet(system, mesh, e, cond.value, options.dirichlet);
        else
            apply_neumann(system, mesh, e, cond.value);
    }
    return system;
}

/// System restricted to the unconstrained DoFs.
struct ReducedSystem {
    SparseMatrix A;
    Eigen::VectorXd b;
    std::vector<int> free_to_global;
    std::vector<int> global_to_free; // -1 for constrained DoFs

    int size() const { return static_cast<int>(free_to_global.size()); }
};

/// Symmetric elimination of the constrained DoFs: b_f - A_fc u_c on the free rows.
inline ReducedSystem reduce(const GlobalSystem& system)
{
    const int n = system.dofs.total();
    ReducedSystem red;
    red.global_to_free.assign(n, -1);
    for (int i = 0; i < n; ++i) {
        if (system.constrained.count(i)) continue;
        red.global_to_free[i] = static_cast<int>(red.free_to_global.size());
        red.free_to_global.push_back(i);
    }
    red.b.resize(red.size());
    for (int i = 0; i < red.size(); ++i)
        red.b[i] = system.b[red.free_to_global[i]];
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(system.A.nonZeros());
    for (int j = 0; j < system.A.outerSize(); ++j) {
        const int fj = red.global_to_free[j];
        const auto cit = fj < 0 ? system.constrained.find(j) : system.constrained.end();
        for (SparseMatrix::InnerIterator it(system.A, j); it; ++it) {
            const int fi = red.global_to_free[it.row()];
            if (fi < 0) continue;
            if (fj >= 0)
                trips.emplace_back(fi, fj, it.value());
            else
                red.b[fi] -= it.value() * cit->second;
        }
    }
    red.A.resize(red.size(), red.size());
    red.A.setFromTriplets(trips.begin(), trips.end());
    return red;
}

/// Full DoF vector from a solution of the reduced system.
inline Eigen::VectorXd expand(const GlobalSystem& system, const ReducedSystem& red, const Eigen::VectorXd& x)
{
    Eigen::VectorXd u(system.dofs.total());
    for (const auto& [dof, value] : system.constrained)
        u[dof] = value;
    for (int i = 0; i < red.size(); ++i)
        u[red.free_to_global[i]] = x[i];
    return u;
}

/// Matrix Market coordinate export (lower triangle, symmetric).
inline void write_matrix_market(std::ostream& os, const SparseMatrix& A)
{
    std::size_t nnz = 0;
    for (int j = 0; j < A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(A, j); it; ++it)
            nnz += it.row() >= j ? 1 : 0;
    os << "%%MatrixMarket matrix coordinate real symmetric\n";
    os << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
    os.precision(17);
    for (int j = 0; j < A.outerSize(); ++j)
        for (SparseMatrix::InnerIterator it(A, j); it; ++it)
            if (it.row() >= j) os << it.row() + 1 << ' ' << j + 1 << ' ' << it.value() << '\n';
}

} // namespace stagpoly
