#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include <stagpoly/assembly.hpp>
#include <stagpoly/condensation.hpp>
#include <stagpoly/driver.hpp>
#include <stagpoly/polymesh.hpp>
#include <stagpoly/problems.hpp>
#include <stagpoly/solver.hpp>
#include <stagpoly/voronoi.hpp>

using namespace stagpoly;

namespace {

constexpr double pi = std::numbers::pi;

PolyMesh unit_square()
{
    return make_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
}

PolyMesh pentagon()
{
    return make_mesh({{0, 0}, {1, 0}, {1.3, 0.8}, {0.5, 1.4}, {-0.3, 0.8}}, {{0, 1, 2, 3, 4}});
}

GlobalSystem assemble(const PolyMesh& m, int k, const ScalarFn& f, const BoundarySpec& bc,
                      const AssemblyOptions& options = {})
{
    const SubTriangulation sub = build_subtriangulation(m);
    return assemble_system(m, sub, k, CoefficientField::identity(), f, bc, options);
}

Eigen::VectorXd constant_vector(const DofMap& dofs, double c)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.total());
    for (int e = 0; e < dofs.num_face_dofs() / dofs.face_dim(); ++e)
        v[dofs.face_offset(e)] = c;
    for (int cell = 0; cell < dofs.num_cell_dofs() / dofs.cell_dim(); ++cell)
        v[dofs.cell_offset(cell)] = c;
    return v;
}

} // namespace

TEST(DofMap, Counts)
{
    EXPECT_EQ(build_dof_map(unit_square(), 0).total(), 7);
    EXPECT_EQ(build_dof_map(gen_uniform_triangles(4), 0).total(), 152);
    EXPECT_EQ(build_dof_map(pentagon(), 1).total(), 16);
    const DofMap d = build_dof_map(gen_uniform_squares(3), 2);
    EXPECT_EQ(d.total(), 24 * 3 + 9 * 10);
    EXPECT_EQ(d.cell_offset(0), d.num_face_dofs());
}

TEST(DofMap, LocalToGlobalIsContiguousPerCell)
{
    const PolyMesh m = gen_voronoi_polygons(15, 5, 2);
    const DofMap d = build_dof_map(m, 1);
    std::vector<int> seen(d.total(), 0);
    for (int c = 0; c < m.num_cells(); ++c) {
        const auto map = d.local_to_global(m, c);
        EXPECT_EQ(map.size(), m.cells[c].size() * 2 + 6);
        for (int g : map)
            ++seen[g];
    }
    for (int e = 0; e < m.num_edges(); ++e)
        EXPECT_EQ(seen[d.face_offset(e)], m.edges[e].is_boundary() ? 1 : 2);
}

TEST(Assembly, BitSymmetricWithConstantKernel)
{
    for (const PolyMesh& m : {gen_uniform_triangles(4), gen_voronoi_polygons(30, 20, 5)}) {
        for (int k : {0, 1}) {
            const GlobalSystem s = assemble(m, k, {}, BoundarySpec::dirichlet_everywhere());
            const SparseMatrix At = s.A.transpose();
            EXPECT_EQ((s.A - At).norm(), 0.0);
            const double norm = Eigen::MatrixXd(s.A).norm();
            EXPECT_LE((s.A * constant_vector(s.dofs, 1.0)).norm(), 1e-11 * norm);
        }
    }
}

TEST(Assembly, PreBoundaryKernelDimensionOne)
{
    for (const PolyMesh& m : {gen_uniform_triangles(3), gen_uniform_squares(4), gen_voronoi_polygons(12, 20, 1)}) {
        const GlobalSystem s = assemble(m, 0, {}, BoundarySpec::dirichlet_everywhere());
        ASSERT_LE(s.dofs.total(), 200);
        const Eigen::MatrixXd A(s.A);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
        const double norm = A.norm();
        EXPECT_LE(std::abs(ev[0]), 1e-12 * norm);
        EXPECT_GT(ev[1], 1e-12 * norm);
        EXPECT_GT(ev[1], 1e-6 * norm);
    }
}

TEST(Assembly, ThreadCountDoesNotChangeTheMatrix)
{
    const PolyMesh m = gen_voronoi_polygons(200, 10, 3);
    const Problem p = example2();
    const GlobalSystem a = assemble(m, 1, p.f, p.bc, AssemblyOptions{1});
    const GlobalSystem b = assemble(m, 1, p.f, p.bc, AssemblyOptions{4});
    const GlobalSystem c = assemble(m, 1, p.f, p.bc, AssemblyOptions{3});
    EXPECT_EQ((a.A - b.A).norm(), 0.0);
    EXPECT_EQ((a.A - c.A).norm(), 0.0);
    EXPECT_EQ(a.b, b.b);
    EXPECT_EQ(a.b, c.b);
}

TEST(Dirichlet, ZeroDataDeletesRowsOnly)
{
    const PolyMesh m = gen_uniform_triangles(3);
    const ScalarFn f = [](const Point2& x) { return x.x() + 1.0; };
    const GlobalSystem s = assemble(m, 0, f, BoundarySpec::dirichlet_everywhere());
    const ReducedSystem red = reduce(s);
    EXPECT_EQ(red.size(), s.dofs.total() - m.num_boundary_edges());
    for (int i = 0; i < red.size(); ++i)
        EXPECT_EQ(red.b[i], s.b[red.free_to_global[i]]);
}

TEST(Dirichlet, ZeroDataZeroLoadGivesZeroSolution)
{
    const PolyMesh m = gen_voronoi_polygons(20, 10, 2);
    Problem p;
    p.name = "zero";
    p.f = [](const Point2&) { return 0.0; };
    const SolveOutcome out = solve_problem(m, p);
    EXPECT_EQ(out.u.coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dirichlet, UnitDataReproducesConstants)
{
    for (int k : {0, 1}) {
        const PolyMesh m = gen_voronoi_polygons(20, 10, 7);
        Problem p;
        p.name = "one";
        p.f = [](const Point2&) { return 0.0; };
        p.bc = BoundarySpec::dirichlet_everywhere([](const Point2&) { return 1.0; });
        SolveOptions o;
        o.k = k;
        o.solver = LinearSolver::direct;
        const SolveOutcome out = solve_problem(m, p, o);
        EXPECT_LE((out.u.coeffs - constant_vector(out.u.dofs, 1.0)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Dirichlet, FaceValueIsEdgeAverageOfData)
{
    const PolyMesh m = gen_uniform_triangles(4);
    const ScalarFn g = [](const Point2& x) { return std::cos(pi * x.x()) * std::cos(pi * x.y()); };
    const GlobalSystem s = assemble(m, 0, {}, BoundarySpec::dirichlet_everywhere(g));
    for (int e = 0; e < m.num_edges(); ++e) {
        const Edge& edge = m.edges[e];
        if (!edge.is_boundary()) continue;
        const Point2 a = m.vertices[edge.v[0]], b = m.vertices[edge.v[1]];
        // closed-form average of cos(pi x) cos(pi y) along an axis-aligned edge
        double avg;
        if (a.x() == b.x())
            avg = std::cos(pi * a.x()) * (std::sin(pi * b.y()) - std::sin(pi * a.y())) / (pi * (b.y() - a.y()));
        else
            avg = std::cos(pi * a.y()) * (std::sin(pi * b.x()) - std::sin(pi * a.x())) / (pi * (b.x() - a.x()));
        EXPECT_NEAR(s.constrained.at(s.dofs.face_offset(e)), avg, 1e-10);
    }
}

TEST(Dirichlet, InteriorEdgeIsRejected)
{
    const PolyMesh m = gen_uniform_triangles(2);
    GlobalSystem s = assemble(m, 0, {}, BoundarySpec::dirichlet_everywhere());
    int interior = -1;
    for (int e = 0; e < m.num_edges(); ++e)
        if (!m.edges[e].is_boundary()) interior = e;
    try {
        apply_dirichlet(s, m, interior, [](const Point2&) { return 1.0; });
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::boundary);
    }
}

TEST(Dirichlet, MidpointModeUsesPointValues)
{
    const PolyMesh m = gen_uniform_triangles(2);
    const ScalarFn g = [](const Point2& x) { return x.x() * x.x(); };
    const SubTriangulation sub = build_subtriangulation(m);
    const GlobalSystem s = assemble_system(m, sub, 0, CoefficientField::identity(), {},
                                           BoundarySpec::dirichlet_everywhere(g),
                                           AssemblyOptions{0, LoadRule::standard, DirichletData::midpoint});
    for (int e = 0; e < m.num_edges(); ++e) {
        const Edge& edge = m.edges[e];
        if (!edge.is_boundary()) continue;
        const Point2 mid = 0.5 * (m.vertices[edge.v[0]] + m.vertices[edge.v[1]]);
        EXPECT_EQ(s.constrained.at(s.dofs.face_offset(e)), g(mid));
    }
}

TEST(BoundarySpec, CoverageRules)
{
    BoundarySpec spec;
    spec.fallback(std::nullopt).dirichlet(tag_left).neumann(tag_right);
    EXPECT_EQ(spec.for_marker(tag_left).type, BoundaryCondition::Type::dirichlet);
    EXPECT_EQ(spec.for_marker(tag_right).type, BoundaryCondition::Type::neumann);
    EXPECT_THROW(spec.for_marker(tag_top), Error);
    spec.dirichlet(tag_right);
    EXPECT_THROW(spec.for_marker(tag_right), Error);
    const PolyMesh m = gen_uniform_squares(2);
    BoundarySpec partial;
    partial.fallback(std::nullopt).dirichlet(tag_left);
    try {
        assemble(m, 0, {}, partial);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::boundary);
    }
}

TEST(Neumann, LinearSolutionWithMixedData)
{
    // u = 1 + 2x - 3y: outward flux grad u . n on the top is -3, on the bottom +3
    const Problem lin = linear_patch();
    Problem p = lin;
    p.bc = BoundarySpec{};
    p.bc.fallback(std::nullopt)
        .dirichlet(tag_left, lin.exact)
        .dirichlet(tag_right, lin.exact)
        .neumann(tag_top, [](const Point2&) { return -3.0; })
        .neumann(tag_bottom, [](const Point2&) { return 3.0; });
    for (const PolyMesh& m : {gen_uniform_squares(4), gen_voronoi_polygons(30, 30, 4)}) {
        SolveOptions o;
        o.solver = LinearSolver::direct;
        const SolveOutcome out = solve_problem(m, p, o);
        const ErrorNorms e = solve_errors(m, p, out);
        EXPECT_LE(e.energy, 1e-10);
        EXPECT_LE(e.l2, 1e-10);
    }
}

TEST(Condensation, AllFacesKnownLeavesAnEmptySystem)
{
    const PolyMesh m = unit_square();
    const Problem p = linear_patch();
    const GlobalSystem s = assemble(m, 0, p.f, p.bc);
    const ReducedSystem red = reduce(s);
    const CondensedSystem cs = static_condensation(red, s.dofs);
    EXPECT_EQ(cs.S.rows(), 0);
    const Eigen::VectorXd x = cs.recover(Eigen::VectorXd(0));
    const Eigen::VectorXd u = expand(s, red, x);
    // u_0 = 1 + 2x - 3y in the cell basis (1, x - 1/2, y - 1/2)
    EXPECT_NEAR(u[s.dofs.cell_offset(0)], 0.5, 1e-13);
    EXPECT_NEAR(u[s.dofs.cell_offset(0) + 1], 2.0, 1e-13);
    EXPECT_NEAR(u[s.dofs.cell_offset(0) + 2], -3.0, 1e-13);
}

TEST(Condensation, DimensionIsTheFreeFaceCount)
{
    const PolyMesh m = gen_uniform_triangles(4);
    const Problem p = example1();
    const GlobalSystem s = assemble(m, 0, p.f, p.bc);
    const ReducedSystem red = reduce(s);
    const CondensedSystem cs = static_condensation(red, s.dofs);
    EXPECT_EQ(cs.S.rows(), m.num_interior_edges());
}

TEST(Condensation, MatchesTheFullSolve)
{
    const PolyMesh m = gen_uniform_triangles(4);
    const Problem p = example1();
    SolveOptions o;
    o.solver = LinearSolver::direct;
    const SolveOutcome c = solve_problem(m, p, o);
    o.condense = false;
    const SolveOutcome f = solve_problem(m, p, o);
    EXPECT_TRUE(c.condensed);
    EXPECT_FALSE(f.condensed);
    SolutionField diff = c.u;
    diff.coeffs -= f.u.coeffs;
    const SubTriangulation& sub = c.sub;
    const ErrorNorms d = error_norms(m, sub, diff, recover_flux(m, sub, diff, c.coeff, p.flux_sign),
                                     [](const Point2&) { return 0.0; }, [](const Point2&) { return Vector2(0, 0); });
    const ErrorNorms n = error_norms(m, sub, f.u, f.flux, [](const Point2&) { return 0.0; },
                                     [](const Point2&) { return Vector2(0, 0); });
    EXPECT_LE(d.energy, 1e-10 * n.energy);
}

TEST(PatchTest, LinearOnEveryFamily)
{
    const Problem p = linear_patch();
    for (const PolyMesh& m : {gen_uniform_triangles(5), gen_uniform_squares(5), gen_voronoi_polygons(60, 40, 9),
                              gen_delaunay_triangles(50, 2)}) {
        SolveOptions o;
        o.solver = LinearSolver::direct;
        const SolveOutcome out = solve_problem(m, p, o);
        const ErrorNorms e = solve_errors(m, p, out);
        EXPECT_LE(e.energy, 1e-10);
        EXPECT_LE(e.l2, 1e-10);
        EXPECT_LE(e.flux_0h, 1e-10);
    }
}
