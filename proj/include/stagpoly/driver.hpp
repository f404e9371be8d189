#pragma once

#include <chrono>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "assembly.hpp"
#include "condensation.hpp"
#include "error.hpp"
#include "polymesh.hpp"
#include "postprocess.hpp"
#include "problems.hpp"
#include "solver.hpp"
#include "subtriangulation.hpp"

namespace stagpoly {

enum class LinearSolver { cg, direct };

struct SolveOptions {
    int k = 0;
    StarPointRule star = StarPointRule::chebyshev;
    bool condense = true;
    LinearSolver solver = LinearSolver::cg;
    CgOptions cg;
    DirectOptions direct;
    unsigned threads = 0;
    LoadRule load = LoadRule::standard;
    DirichletData dirichlet = DirichletData::projection;
};

/// The choices that reproduce the reference triangle-mesh table: barycentric
/// star points, Dirichlet values at face midpoints and one load sample per fan
/// triangle.
inline SolveOptions triangle_table_profile(SolveOptions base = {})
{
    base.star = StarPointRule::barycenter;
    base.load = LoadRule::centroid;
    base.dirichlet = DirichletData::midpoint;
    return base;
}

struct SolveOutcome {
    SubTriangulation sub;
    CoefficientField coeff;
    GlobalSystem system;
    SolutionField u;
    FluxField flux;
    SolveReport report;
    bool condensed = false;
    double assembly_seconds = 0.0;
};

inline SolveResult solve_linear(const SparseMatrix& A, const Eigen::VectorXd& b, const SolveOptions& options)
{
    return options.solver == LinearSolver::cg ? solve_cg(A, b, options.cg) : solve_direct(A, b, options.direct);
}

/// Assembles, solves (condensed onto the faces when possible) and recovers the
/// flux with the problem's sign convention.
inline SolveOutcome solve_problem(const PolyMesh& mesh, const Problem& problem, const SolveOptions& options = {})
{
    const auto start = std::chrono::steady_clock::now();
    SolveOutcome out;
    out.sub = build_subtriangulation(mesh, options.star);
    out.coeff = problem.coefficient(mesh);
    out.system = assemble_system(mesh, out.sub, options.k, out.coeff, problem.f, problem.bc,
                                 AssemblyOptions{options.threads, options.load, options.dirichlet});
    const ReducedSystem red = reduce(out.system);
    out.assembly_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Eigen::VectorXd x;
    std::optional<CondensedSystem> condensed;
    if (options.condense) {
        try {
            condensed = static_condensation(red, out.system.dofs);
        } catch (const Error& ex) {
            if (ex.kind() != ErrorKind::condensation) throw;
        }
    }
    if (condensed) {
        SolveResult faces = solve_linear(condensed->S, condensed->g, options);
        x = condensed->recover(faces.x);
        out.report = std::move(faces.report);
        out.report.relative_residual = red.b.norm() > 0.0 ? (red.b - red.A * x).norm() / red.b.norm() : 0.0;
        out.report.method += "+condensed";
        out.condensed = true;
    } else {
        SolveResult full = solve_linear(red.A, red.b, options);
        x = std::move(full.x);
        out.report = std::move(full.report);
    }
    out.u.dofs = out.system.dofs;
    out.u.coeffs = expand(out.system, red, x);
    out.flux = recover_flux(mesh, out.sub, out.u, out.coeff, problem.flux_sign);
    return out;
}

/// Error norms of a solve against the problem's exact solution.
inline ErrorNorms solve_errors(const PolyMesh& mesh, const Problem& problem, const SolveOutcome& out,
                               NormQuadrature mode = NormQuadrature::midpoint)
{
    if (!problem.has_exact()) fail(ErrorKind::config, "problem '" + problem.name + "' has no exact solution");
    return error_norms(mesh, out.sub, out.u, out.flux, problem.exact, problem.exact_grad, mode);
}

} // namespace stagpoly
