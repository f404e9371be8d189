#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <stagpoly/cli_support.hpp>
#include <stagpoly/convergence.hpp>
#include <stagpoly/cr.hpp>
#include <stagpoly/driver.hpp>
#include <stagpoly/mesh_io.hpp>
#include <stagpoly/subtriangulation.hpp>
#include <stagpoly/voronoi.hpp>
#include <stagpoly/vtk.hpp>

namespace fs = std::filesystem;
using namespace stagpoly;

namespace {

constexpr double crcheck_threshold = 1e-10;
constexpr int exit_check_failed = 4;

struct MeshArgs {
    int triangles = 0;
    int squares = 0;
    int voronoi = 0;
    int delaunay = 0;
    int lloyd = 100;
    std::uint64_t seed = 1;
    std::string file;
};

void add_mesh_args(CLI::App* cmd, MeshArgs& m)
{
    auto* t = cmd->add_option("--triangles", m.triangles, "n x n squares, each cut into two triangles");
    auto* s = cmd->add_option("--squares", m.squares, "n x n squares");
    auto* v = cmd->add_option("--voronoi", m.voronoi, "Lloyd-relaxed Voronoi mesh with this many cells");
    auto* d = cmd->add_option("--delaunay", m.delaunay, "Delaunay triangulation with this many interior points");
    auto* f = cmd->add_option("--mesh", m.file, "mesh document");
    for (auto* a : {t, s, v, d, f})
        for (auto* b : {t, s, v, d, f})
            if (a != b) a->excludes(b);
    cmd->add_option("--lloyd", m.lloyd, "Lloyd iterations for --voronoi")->capture_default_str();
    cmd->add_option("--seed", m.seed, "random seed for --voronoi and --delaunay")->capture_default_str();
}

PolyMesh make_mesh_from(const MeshArgs& m)
{
    if (m.triangles > 0) return gen_uniform_triangles(m.triangles);
    if (m.squares > 0) return gen_uniform_squares(m.squares);
    if (m.voronoi > 0) return gen_voronoi_polygons(m.voronoi, m.lloyd, m.seed);
    if (m.delaunay > 0) return gen_delaunay_triangles(m.delaunay, m.seed);
    if (!m.file.empty()) return load_mesh_file(m.file);
    fail(ErrorKind::config, "no mesh given (--triangles, --squares, --voronoi, --delaunay or --mesh)");
}

void add_run_args(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--config", "JSON run configuration; flags override its values");
    cmd->add_option("--problem", cfg.problem, "example1 | example2 | example3 | linear | quadratic")
        ->capture_default_str();
    cmd->add_option("--family", cfg.family, "triangles | squares | voronoi | delaunay")->capture_default_str();
    cmd->add_option("--lloyd", cfg.lloyd, "Lloyd iterations for Voronoi meshes")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed for Voronoi and Delaunay meshes")->capture_default_str();
    cmd->add_option("-k,--degree", cfg.k, "polynomial degree")->capture_default_str();
    cmd->add_option("--solver", cfg.solver, "cg | direct")->capture_default_str();
    cmd->add_option("--tol", cfg.tol, "CG relative residual tolerance")->capture_default_str();
    cmd->add_option("--maxit", cfg.maxit, "CG iteration cap (-1: automatic)")->capture_default_str();
    cmd->add_flag("--condense,!--no-condense", cfg.condense, "eliminate cell unknowns before solving");
    cmd->add_option("--profile", cfg.profile,
                    "default | table (barycentric star points, midpoint Dirichlet data, one load sample per "
                    "fan triangle)")
        ->capture_default_str();
    cmd->add_option("--quadrature", cfg.quadrature, "error-norm quadrature: midpoint | high-order | cubic")
        ->capture_default_str();
    cmd->add_option("--threads", cfg.threads, "assembly threads (0: all cores)")->capture_default_str();
}

std::string timestamp_line()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "generated %Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

int cmd_mesh_gen(const MeshArgs& m, const std::string& output)
{
    if (!m.file.empty()) fail(ErrorKind::config, "mesh gen takes a generator, not --mesh");
    const PolyMesh mesh = make_mesh_from(m);
    StagedOutput staged;
    staged.write(output, [&](std::ostream& os) { write_mesh(os, mesh); });
    staged.commit();
    std::cout << "wrote " << output << ": " << mesh.num_cells() << " cells, " << mesh.vertices.size()
              << " vertices, " << mesh.num_edges() << " edges\n";
    return 0;
}

int cmd_mesh_info(const std::string& file, const std::string& star)
{
    const PolyMesh mesh = load_mesh_file(file);
    std::cout << "cells " << mesh.num_cells() << "\nvertices " << mesh.vertices.size() << "\nedges "
              << mesh.num_edges() << "\nboundary_edges " << mesh.num_boundary_edges() << "\nmesh_size "
              << mesh.mesh_size << '\n';
    int max_sides = 0;
    for (const auto& c : mesh.cells)
        max_sides = std::max(max_sides, static_cast<int>(c.size()));
    std::cout << "max_sides " << max_sides << '\n';
    const StarPointRule rule = star == "barycenter" ? StarPointRule::barycenter : StarPointRule::chebyshev;
    if (star != "barycenter" && star != "chebyshev") fail(ErrorKind::config, "unknown star rule '" + star + "'");
    const SubTriangulation sub = build_subtriangulation(mesh, rule);
    const MeshQualityReport q = quality_report(mesh, sub);
    std::cout << "star_points valid\nfan_triangles " << sub.triangles.size() << "\nmax_chunkiness "
              << q.max_chunkiness << "\nmax_face_ratio " << q.max_face_ratio << '\n';
    return 0;
}

PolyMesh run_mesh(const RunConfig& cfg)
{
    if (!cfg.mesh_file.empty()) return load_mesh_file(cfg.mesh_file);
    MeshFamily f = family_of(cfg);
    return f.make(cfg.n);
}

int cmd_solve(const RunConfig& cfg)
{
    const SolveOptions options = validate(cfg);
    const Problem problem = problem_by_name(cfg.problem);
    const PolyMesh mesh = run_mesh(cfg);
    const SolveOutcome out = solve_problem(mesh, problem, options);
    const ConservationReport cons = conservation_residuals(mesh, out.sub, out.flux, problem.f);

    std::ostringstream summary;
    summary << "problem " << problem.name << "\ncells " << mesh.num_cells() << "\nh " << detail::sci(mesh.mesh_size)
            << "\nk " << cfg.k << '\n';
    write_solve_report(summary, out.report, out.condensed, out.assembly_seconds);
    summary << "conservation_max " << detail::sci(cons.max_abs) << '\n';
    std::optional<ErrorNorms> errors;
    if (problem.has_exact()) {
        errors = solve_errors(mesh, problem, out, quadrature_from_string(cfg.quadrature));
        write_error_report(summary, *errors, cfg.k);
    }
    std::cout << summary.str();

    const fs::path dir(cfg.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");
    StagedOutput staged;
    staged.write(dir / "solution.vtk", [&](std::ostream& os) { write_vtk(os, mesh, out.sub, out.u, out.flux); });
    staged.write(dir / "report.txt", [&](std::ostream& os) { os << summary.str(); });
    staged.write(dir / "conservation.txt", [&](std::ostream& os) { write_conservation_report(os, cons); });
    if (errors) staged.write(dir / "errors.txt", [&](std::ostream& os) { write_error_report(os, *errors, cfg.k); });
    staged.commit();
    return 0;
}

int cmd_convergence(const RunConfig& cfg, const std::string& output)
{
    const SolveOptions options = validate(cfg);
    if (!cfg.mesh_file.empty()) fail(ErrorKind::config, "convergence studies use a mesh family, not a mesh file");
    if (cfg.levels.empty()) fail(ErrorKind::config, "--levels is required");
    const Problem problem = problem_by_name(cfg.problem);
    const ConvergenceReport report = convergence_study(problem, family_of(cfg), columns_of(cfg), options,
                                                       quadrature_from_string(cfg.quadrature));
    const std::string comment = cfg.timestamp ? timestamp_line() : std::string();
    std::ostringstream csv;
    write_csv(csv, report, comment);
    std::cout << csv.str();
    std::ostringstream comparison;
    if (cfg.compare_reference) {
        if (problem.name != "example1" || report.columns != triangle_table_columns())
            fail(ErrorKind::config, "--compare-paper needs example1 with the triangle columns");
        write_reference_comparison(comparison, report);
        std::cout << '\n' << comparison.str();
    }
    if (!output.empty()) {
        StagedOutput staged;
        staged.write(output, [&](std::ostream& os) { os << csv.str(); });
        if (cfg.compare_reference) {
            fs::path p(output);
            p.replace_filename(p.stem().string() + "_reference.csv");
            staged.write(p, [&](std::ostream& os) { os << comparison.str(); });
        }
        staged.commit();
    }
    return 0;
}

int cmd_conserve(RunConfig cfg, const std::string& output)
{
    cfg.problem = "example3";
    cfg.family = "squares";
    const SolveOptions options = validate(cfg);
    const Problem problem = example3();
    const PolyMesh mesh = run_mesh(cfg);
    const SolveOutcome out = solve_problem(mesh, problem, options);
    const ConservationReport cons = conservation_residuals(mesh, out.sub, out.flux, problem.f);
    std::cout << "cells " << mesh.num_cells() << '\n';
    write_solve_report(std::cout, out.report, out.condensed, out.assembly_seconds);
    std::cout << "conservation_max " << detail::sci(cons.max_abs) << '\n';
    if (!output.empty()) {
        StagedOutput staged;
        staged.write(output, [&](std::ostream& os) { write_conservation_report(os, cons); });
        staged.commit();
    }
    return 0;
}

int cmd_crcheck(const MeshArgs& m)
{
    const PolyMesh mesh = make_mesh_from(m);
    for (int c = 0; c < mesh.num_cells(); ++c)
        if (mesh.cells[c].size() != 3)
            fail(ErrorKind::validation, "cr-check needs a triangle mesh; cell " + std::to_string(c) + " has "
                                            + std::to_string(mesh.cells[c].size()) + " vertices");
    const CrReport r = cr_equivalence(mesh);
    std::cout << "cells " << mesh.num_cells() << "\nwg_dofs " << r.wg_dofs << "\ncr_dofs " << r.cr_dofs
              << "\ndiscrepancy " << detail::sci(r.discrepancy) << '\n';
    const bool ok = r.discrepancy <= crcheck_threshold;
    std::cout << (ok ? "PASS" : "FAIL") << " (threshold " << crcheck_threshold << ")\n";
    return ok ? 0 : exit_check_failed;
}

/// "--config path" is read before flag parsing so that flags override it.
RunConfig initial_config(int argc, char** argv)
{
    RunConfig cfg;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return load_run_config_file(argv[i + 1]);
        if (std::strncmp(argv[i], "--config=", 9) == 0) return load_run_config_file(argv[i] + 9);
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Weak Galerkin / staggered DG solver for elliptic problems on polygonal meshes"};
    app.require_subcommand(1);

    RunConfig cfg;
    try {
        cfg = initial_config(argc, argv);
    } catch (const Error& ex) {
        std::cerr << ex.what() << '\n';
        return exit_code(ex.kind());
    }

    auto* mesh = app.add_subcommand("mesh", "generate or inspect meshes");
    mesh->require_subcommand(1);
    MeshArgs gen_args;
    std::string gen_output;
    auto* gen = mesh->add_subcommand("gen", "write a generated mesh document");
    add_mesh_args(gen, gen_args);
    gen->add_option("-o,--output", gen_output, "output mesh document")->required();
    std::string info_file, info_star = "chebyshev";
    auto* info = mesh->add_subcommand("info", "print counts, quality and star-point validity");
    info->add_option("file", info_file, "mesh document")->required();
    info->add_option("--star", info_star, "chebyshev | barycenter")->capture_default_str();

    auto* solve = app.add_subcommand("solve", "solve one problem and write VTK and reports");
    add_run_args(solve, cfg);
    solve->add_option("-n,--level", cfg.n, "mesh level")->capture_default_str();
    solve->add_option("--mesh", cfg.mesh_file, "mesh document (overrides --family)");
    solve->add_option("--out", cfg.out, "output directory")->capture_default_str();

    std::string conv_output;
    auto* conv = app.add_subcommand("convergence", "error table over a mesh family");
    add_run_args(conv, cfg);
    conv->add_option("--levels", cfg.levels, "comma-separated mesh levels")->delimiter(',');
    conv->add_option("--columns", cfg.columns, "auto | triangle | polygon")->capture_default_str();
    conv->add_flag("--compare-paper", cfg.compare_reference, "compare example1 with the reference triangle table");
    conv->add_flag("!--no-timestamp", cfg.timestamp, "omit the timestamp comment line");
    conv->add_option("-o,--output", conv_output, "CSV file (also printed)");

    std::string cons_output;
    RunConfig cons_cfg = cfg;
    cons_cfg.n = 32;
    auto* cons = app.add_subcommand("conserve", "local conservation demo on the Darcy problem");
    cons->add_option("-n,--level", cons_cfg.n, "n x n squares")->capture_default_str();
    cons->add_option("--solver", cons_cfg.solver, "cg | direct")->capture_default_str();
    cons->add_option("--tol", cons_cfg.tol, "CG relative residual tolerance")->capture_default_str();
    cons->add_flag("--condense,!--no-condense", cons_cfg.condense, "eliminate cell unknowns before solving");
    cons->add_option("--threads", cons_cfg.threads, "assembly threads (0: all cores)")->capture_default_str();
    cons->add_option("-o,--output", cons_output, "per-cell residual report");

    MeshArgs cr_args;
    auto* cr = app.add_subcommand("cr-check", "compare the k = 0 matrix with the Crouzeix-Raviart matrix");
    add_mesh_args(cr, cr_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return 1;
    }

    try {
        if (*gen) return cmd_mesh_gen(gen_args, gen_output);
        if (*info) return cmd_mesh_info(info_file, info_star);
        if (*solve) return cmd_solve(cfg);
        if (*conv) return cmd_convergence(cfg, conv_output);
        if (*cons) return cmd_conserve(cons_cfg, cons_output);
        if (*cr) return cmd_crcheck(cr_args);
    } catch (const SolveError& ex) {
        std::cerr << ex.what() << "\niterations " << ex.report().iterations << "\nrelative_residual "
                  << ex.report().relative_residual << '\n';
        return exit_code(ex.kind());
    } catch (const Error& ex) {
        std::cerr << ex.what() << '\n';
        return exit_code(ex.kind());
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
