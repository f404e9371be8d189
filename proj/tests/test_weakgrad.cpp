#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <stagpoly/basis.hpp>
#include <stagpoly/coefficient.hpp>
#include <stagpoly/polymesh.hpp>
#include <stagpoly/quadrature.hpp>
#include <stagpoly/subtriangulation.hpp>
#include <stagpoly/voronoi.hpp>
#include <stagpoly/weakgrad.hpp>

using namespace stagpoly;

namespace {

PolyMesh unit_square()
{
    return make_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}});
}

PolyMesh pentagon()
{
    std::vector<Point2> v;
    for (int i = 0; i < 5; ++i) {
        const double a = 2.0 * std::numbers::pi * i / 5 + 0.3;
        v.emplace_back(0.5 + 0.4 * std::cos(a) + 0.05 * (i % 2), 0.5 + 0.35 * std::sin(a));
    }
    return make_mesh(std::move(v), {{0, 1, 2, 3, 4}});
}

std::vector<PolyMesh> test_meshes()
{
    return {pentagon(), gen_uniform_triangles(3), gen_uniform_squares(3), gen_voronoi_polygons(25, 30, 6)};
}

Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = u(gen);
    return v;
}

Eigen::VectorXd constant_local(const ElementOperator& op)
{
    Eigen::VectorXd v = Eigen::VectorXd::Zero(op.num_local_dofs());
    v.head(op.num_face_dofs()).setZero();
    const int nb = op.k + 1;
    for (int i = 0; i < op.num_face_dofs(); i += nb)
        v[i] = 1.0;
    v[op.num_face_dofs()] = 1.0;
    return v;
}

int fan_index_with_normal(const SubTriangulation& sub, int cell, const Vector2& n)
{
    const auto fan = sub.fan(cell);
    for (int i = 0; i < static_cast<int>(fan.size()); ++i)
        if ((fan[i].normal - n).norm() < 1e-14) return i;
    return -1;
}

// Flux field value of coefficient vector w on fan triangle tri.
Vector2 flux_value(const FluxBasis& fb, const Eigen::VectorXd& w, int tri, const Point2& x)
{
    return fb.eval_on(tri, x) * w;
}

} // namespace

TEST(LocalMass, UnitSquareIdentity)
{
    const PolyMesh m = unit_square();
    const SubTriangulation sub = build_subtriangulation(m);
    const Eigen::MatrixXd M = local_mass(sub, 0, 0, CoefficientField::identity());
    EXPECT_LT((M - 0.25 * Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LocalMass, ScalarCoefficientScalesByInverse)
{
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int k : {0, 1}) {
            const Eigen::MatrixXd M1 = local_mass(sub, 0, k, CoefficientField::identity());
            const Eigen::MatrixXd Mk = local_mass(sub, 0, k, CoefficientField::scalar(1e-3));
            EXPECT_LT((Mk - 1e3 * M1).norm(), 1e-12 * Mk.norm());
        }
    }
}

TEST(LocalMass, NonSpdCoefficientIsRejected)
{
    const PolyMesh m = unit_square();
    const SubTriangulation sub = build_subtriangulation(m);
    try {
        local_mass(sub, 0, 0, CoefficientField::scalar(-1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::coefficient);
    }
}

TEST(LocalDbD0, UnitSquareClosedForm)
{
    const PolyMesh m = unit_square();
    const SubTriangulation sub = build_subtriangulation(m);
    const auto [Db, D0] = local_db_d0(m, sub, 0, 0);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(8, 4);
    expected.topRows(4) = Eigen::MatrixXd::Identity(4, 4);
    EXPECT_LT((Db - expected).cwiseAbs().maxCoeff(), 1e-15);

    const int bottom = fan_index_with_normal(sub, 0, Vector2(0, -1));
    ASSERT_GE(bottom, 0);
    EXPECT_LT((D0.row(bottom).transpose() - Eigen::Vector3d(-1, 0, 0.25)).cwiseAbs().maxCoeff(), 1e-15);
    // tangent block: [0, |T| t_x / h_K, |T| t_y / h_K] with t = (1, 0)
    EXPECT_LT((D0.row(4 + bottom).transpose() - Eigen::Vector3d(0, 0.25, 0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(LocalStiffness, SymmetricPsdWithConstantKernel)
{
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int k : {0, 1}) {
            for (int c = 0; c < m.num_cells(); ++c) {
                const ElementOperator op = element_operator(m, sub, c, k, CoefficientField::identity());
                const double norm = op.A.norm();
                EXPECT_LE((op.A - op.A.transpose()).cwiseAbs().maxCoeff(), 1e-13 * norm);
                const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op.A).eigenvalues();
                EXPECT_GE(ev[0], -1e-12 * norm);
                // exactly one null direction
                EXPECT_LE(std::abs(ev[0]), 1e-12 * norm);
                EXPECT_GT(ev[1], 1e-8 * norm) << "cell " << c << " k " << k;
                const Eigen::VectorXd one = constant_local(op);
                EXPECT_LE((op.A * one).norm(), 1e-12 * norm);
                EXPECT_LE((op.coupling() * one).norm(), 1e-13 * op.coupling().norm());
            }
        }
    }
}

TEST(LocalStiffness, UnitSquareSecondEigenvaluePositive)
{
    const PolyMesh m = unit_square();
    const SubTriangulation sub = build_subtriangulation(m);
    const Eigen::MatrixXd A = local_stiffness(m, sub, 0, 0, CoefficientField::identity());
    ASSERT_EQ(A.rows(), 7);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues();
    EXPECT_GT(ev[1], 1e-3);
}

TEST(LocalStiffness, ScalesWithConstantCoefficient)
{
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        const Eigen::MatrixXd A1 = local_stiffness(m, sub, 0, 0, CoefficientField::identity());
        const Eigen::MatrixXd A7 = local_stiffness(m, sub, 0, 0, CoefficientField::scalar(7.5));
        EXPECT_LE((A7 - 7.5 * A1).norm(), 1e-12 * A7.norm());
    }
}

TEST(LocalStiffness, InvariantUnderTangentFlip)
{
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int k : {0, 1}) {
            const Eigen::MatrixXd A = element_operator(m, sub, 0, k, CoefficientField::identity()).A;
            const Eigen::MatrixXd B = element_operator(m, sub, 0, k, CoefficientField::identity(), -1.0).A;
            EXPECT_LE((A - B).norm(), 1e-12 * A.norm());
        }
    }
}

TEST(WeakGradient, ConstantsGiveZero)
{
    const PolyMesh m = pentagon();
    const SubTriangulation sub = build_subtriangulation(m);
    const ElementOperator op = element_operator(m, sub, 0, 0, CoefficientField::identity());
    const Eigen::VectorXd w = weak_gradient_coeffs(op, 3.5 * constant_local(op));
    EXPECT_LE(w.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(WeakGradient, LinearFunctionsAreExact)
{
    const double alpha = 0.3, beta = -1.7, gamma = 2.2;
    auto u = [&](const Point2& x) { return alpha + beta * x.x() + gamma * x.y(); };
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int c = 0; c < m.num_cells(); ++c) {
            const ElementOperator op = element_operator(m, sub, c, 0, CoefficientField::identity());
            const auto fan = sub.fan(c);
            const int n = static_cast<int>(fan.size());
            const CellGeometry& g = sub.cells[c];
            Eigen::VectorXd local(n + 3);
            for (int i = 0; i < n; ++i)
                local[i] = u(fan[i].midpoint);
            local.tail(3) << u(g.vertex_average), beta * g.scale, gamma * g.scale;
            const Eigen::VectorXd w = weak_gradient_coeffs(op, local);
            for (int i = 0; i < n; ++i) {
                EXPECT_NEAR(w[i], Vector2(beta, gamma).dot(fan[i].normal), 1e-12);
                EXPECT_NEAR(w[n + i], Vector2(beta, gamma).dot(fan[i].tangent), 1e-12);
            }
        }
    }
}

TEST(WeakGradient, OnlyTheSlopeMatters)
{
    // u_0 = a + b (x - xbar)/h_K with u_b the face midpoint values: grad_w u = (b/h_K, 0)
    const PolyMesh m = pentagon();
    const SubTriangulation sub = build_subtriangulation(m);
    const ElementOperator op = element_operator(m, sub, 0, 0, CoefficientField::identity());
    const CellGeometry& g = sub.cells[0];
    const double a = 0.7, b = 1.3;
    const auto fan = sub.fan(0);
    Eigen::VectorXd local(fan.size() + 3);
    for (std::size_t i = 0; i < fan.size(); ++i)
        local[static_cast<Eigen::Index>(i)] = a + b * (fan[i].midpoint.x() - g.vertex_average.x()) / g.scale;
    local.tail(3) << a, b, 0.0;
    const Eigen::VectorXd w = weak_gradient_coeffs(op, local);
    const FluxBasis fb(sub, 0, 0);
    for (int i = 0; i < fb.num_triangles(); ++i) {
        const Vector2 v = flux_value(fb, w, i, fan[i].centroid);
        EXPECT_NEAR(v.x(), b / g.scale, 1e-12);
        EXPECT_NEAR(v.y(), 0.0, 1e-12);
    }
}

TEST(WeakGradient, DefiningIdentityOnRandomFields)
{
    std::mt19937_64 gen(11);
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int k : {0, 1, 2}) {
            for (int c = 0; c < m.num_cells(); c += 3) {
                const ElementOperator op = element_operator(m, sub, c, k, CoefficientField::identity());
                const FluxBasis fb(sub, c, k);
                const ScaledMonomials cb = cell_basis(sub, c, k);
                const auto fan = sub.fan(c);
                const QuadRule tri = triangle_rule(2 * k + 4);
                const QuadRule seg = edge_rule(k + 3);
                for (int trial = 0; trial < 20; ++trial) {
                    const Eigen::VectorXd local = random_vector(gen, op.num_local_dofs());
                    const Eigen::VectorXd w = weak_gradient_coeffs(op, local);
                    const Eigen::VectorXd u0 = local.tail(op.num_cell_dofs());
                    Eigen::VectorXd lhs = Eigen::VectorXd::Zero(fb.dim());
                    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(fb.dim());
                    for (int i = 0; i < fb.num_triangles(); ++i) {
                        const FanTriangle& t = fan[i];
                        for (const auto& qp : map_to_triangle(tri, sub.cells[c].star, t.a, t.b)) {
                            const auto z = fb.eval_on(i, qp.x);
                            const Vector2 grad_u0 = cb.grad(qp.x).transpose() * u0;
                            lhs += qp.w * z.transpose() * flux_value(fb, w, i, qp.x);
                            rhs += qp.w * z.transpose() * grad_u0;
                        }
                        const FaceBasis face = face_basis(m, t.edge, k);
                        const Eigen::VectorXd ub = local.segment(i * (k + 1), k + 1);
                        for (const auto& qp : map_to_segment(seg, t.a, t.b)) {
                            const double jump = face.eval(qp.x).dot(ub) - cb.eval(qp.x).dot(u0);
                            rhs += qp.w * jump * (fb.eval_on(i, qp.x).transpose() * t.normal);
                        }
                    }
                    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
                        << "k " << k << " cell " << c;
                }
            }
        }
    }
}

TEST(WeakDivergence, ConstantFluxHasZeroDivergence)
{
    const PolyMesh m = pentagon();
    const SubTriangulation sub = build_subtriangulation(m);
    const FluxBasis fb(sub, 0, 0);
    const Vector2 s(0.4, -1.1);
    Eigen::VectorXd sigma(fb.dim());
    for (int i = 0; i < fb.num_triangles(); ++i) {
        sigma[fb.index(0, i, 0)] = s.dot(fb.frame(0, i));
        sigma[fb.index(1, i, 0)] = s.dot(fb.frame(1, i));
    }
    const WeakDivergence d = weak_divergence(m, sub, 0, 0, sigma);
    EXPECT_LE(d.cell.cwiseAbs().maxCoeff(), 1e-13);
    // face part is -h_F^{-1} sigma.n
    const auto fan = sub.fan(0);
    for (int i = 0; i < fb.num_triangles(); ++i)
        EXPECT_NEAR(d.faces[i], -s.dot(fan[i].normal) / fan[i].length, 1e-13);
}

TEST(WeakDivergence, AdjointToWeakGradient)
{
    std::mt19937_64 gen(3);
    for (const PolyMesh& m : test_meshes()) {
        const SubTriangulation sub = build_subtriangulation(m);
        for (int k : {0, 1}) {
            for (int c = 0; c < m.num_cells(); c += 2) {
                const ElementOperator op = element_operator(m, sub, c, k, CoefficientField::identity());
                const Eigen::MatrixXd G = cell_gram(sub, c, k);
                const auto fan = sub.fan(c);
                for (int trial = 0; trial < 20; ++trial) {
                    const Eigen::VectorXd local = random_vector(gen, op.num_local_dofs());
                    const Eigen::VectorXd sigma = random_vector(gen, op.M.rows());
                    // (grad_w u, sigma)_K in the plain L2 frame
                    const double lhs = sigma.dot(op.coupling() * local);
                    const WeakDivergence d = weak_divergence(m, sub, c, k, sigma);
                    double rhs = d.cell.dot(G * local.tail(op.num_cell_dofs()));
                    for (std::size_t i = 0; i < fan.size(); ++i) {
                        const FaceBasis fb = face_basis(m, fan[i].edge, k);
                        const Eigen::MatrixXd Gf = face_gram(fb, fan[i].a, fan[i].b, k + 2);
                        const Eigen::Index off = static_cast<Eigen::Index>(i) * (k + 1);
                        rhs += fan[i].length * local.segment(off, k + 1).dot(Gf * d.faces.segment(off, k + 1));
                    }
                    EXPECT_NEAR(lhs, -rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
                }
            }
        }
    }
}

TEST(FaceProjection, ClosedForms)
{
    const PolyMesh m = unit_square();
    int bottom = -1;
    for (int e = 0; e < m.num_edges(); ++e)
        if (m.edges[e].marker == tag_bottom) bottom = e;
    ASSERT_GE(bottom, 0);
    EXPECT_NEAR(face_projection(m, bottom, 0, [](const Point2&) { return 2.5; })[0], 2.5, 1e-15);
    EXPECT_NEAR(face_projection(m, bottom, 0, [](const Point2& x) { return 3.0 * x.x() - 1.0; })[0], 0.5, 1e-15);
    EXPECT_NEAR(face_projection(m, bottom, 0, [](const Point2& x) { return x.x() * x.x(); })[0], 1.0 / 3.0, 1e-15);
    const Eigen::VectorXd lin = face_projection(m, bottom, 1, [](const Point2& x) { return 3.0 * x.x() - 1.0; });
    const FaceBasis fb = face_basis(m, bottom, 1);
    for (double s : {0.0, 0.3, 1.0})
        EXPECT_NEAR(fb.eval({s, 0.0}).dot(lin), 3.0 * s - 1.0, 1e-14);
}
