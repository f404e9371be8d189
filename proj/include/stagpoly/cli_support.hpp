#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "convergence.hpp"
#include "driver.hpp"
#include "error.hpp"
#include "mesh_io.hpp"
#include "postprocess.hpp"
#include "problems.hpp"

namespace stagpoly {

/// Process exit status for a library error: 1 configuration, 2 mesh, 3 solver.
inline int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::orientation:
    case ErrorKind::non_manifold:
    case ErrorKind::degenerate_cell:
    case ErrorKind::star_shape:
    case ErrorKind::generation: return 2;
    case ErrorKind::singular:
    case ErrorKind::not_spd:
    case ErrorKind::non_convergence:
    case ErrorKind::condensation: return 3;
    case ErrorKind::capability:
    case ErrorKind::coefficient:
    case ErrorKind::boundary:
    case ErrorKind::io:
    case ErrorKind::config: return 1;
    }
    return 1;
}

/// Everything a solve or convergence run needs. A JSON config file sets these
/// by member name; command-line flags override.
struct RunConfig {
    std::string problem = "example1";
    std::string family = "triangles"; // triangles | squares | voronoi | delaunay
    int n = 4;                        // single-solve level
    std::vector<int> levels;          // convergence levels
    int lloyd = 100;
    std::uint64_t seed = 1;
    std::string mesh_file;            // overrides the family for single solves
    int k = 0;
    std::string solver = "cg";        // cg | direct
    double tol = 1e-10;
    int maxit = -1;
    bool condense = true;
    std::string profile = "default";  // default | table
    std::string quadrature = "midpoint"; // midpoint (alias: paper) | high-order | cubic
    std::string columns = "auto";     // auto | triangle | polygon
    std::string out = ".";
    unsigned threads = 0;
    bool compare_reference = false;
    bool timestamp = true;
};

inline NormQuadrature quadrature_from_string(const std::string& s)
{
    if (s == "midpoint" || s == "paper") return NormQuadrature::midpoint;
    if (s == "high-order") return NormQuadrature::high_order;
    if (s == "cubic") return NormQuadrature::cubic;
    fail(ErrorKind::config, "unknown quadrature mode '" + s + "'");
}

inline RunConfig load_run_config(const nlohmann::json& doc, RunConfig cfg = {})
{
    if (!doc.is_object()) fail(ErrorKind::config, "config document must be an object");
    try {
        for (const auto& [key, v] : doc.items()) {
            if (key == "problem") cfg.problem = v.get<std::string>();
            else if (key == "family") cfg.family = v.get<std::string>();
            else if (key == "n") cfg.n = v.get<int>();
            else if (key == "levels") cfg.levels = v.get<std::vector<int>>();
            else if (key == "lloyd") cfg.lloyd = v.get<int>();
            else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
            else if (key == "mesh_file") cfg.mesh_file = v.get<std::string>();
            else if (key == "k") cfg.k = v.get<int>();
            else if (key == "solver") cfg.solver = v.get<std::string>();
            else if (key == "tol") cfg.tol = v.get<double>();
            else if (key == "maxit") cfg.maxit = v.get<int>();
            else if (key == "condense") cfg.condense = v.get<bool>();
            else if (key == "profile") cfg.profile = v.get<std::string>();
            else if (key == "quadrature") cfg.quadrature = v.get<std::string>();
            else if (key == "columns") cfg.columns = v.get<std::string>();
            else if (key == "out") cfg.out = v.get<std::string>();
            else if (key == "threads") cfg.threads = v.get<unsigned>();
            else if (key == "compare_reference") cfg.compare_reference = v.get<bool>();
            else if (key == "timestamp") cfg.timestamp = v.get<bool>();
            else fail(ErrorKind::config, "unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorKind::config, std::string("malformed config: ") + ex.what());
    }
    return cfg;
}

inline RunConfig load_run_config_file(const std::string& path, RunConfig cfg = {})
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& ex) {
        fail(ErrorKind::config, std::string("config does not parse: ") + ex.what());
    }
    return load_run_config(doc, cfg);
}

/// Checks the cross-field rules and returns the solver options.
inline SolveOptions validate(const RunConfig& cfg)
{
    if (cfg.k < 0) fail(ErrorKind::config, "k must be >= 0");
    if (cfg.threads > 1024) fail(ErrorKind::config, "thread count out of range");
    const Problem problem = problem_by_name(cfg.problem);
    (void)problem;
    if (cfg.mesh_file.empty()) mesh_kind_from_string(cfg.family);
    else if (!std::filesystem::exists(cfg.mesh_file))
        fail(ErrorKind::config, "mesh file '" + cfg.mesh_file + "' does not exist");
    if (cfg.problem == "example3" && cfg.mesh_file.empty() && cfg.family != "squares")
        fail(ErrorKind::config, "example3 runs on the square mesh family");
    quadrature_from_string(cfg.quadrature);

    SolveOptions options;
    if (cfg.profile == "table") options = triangle_table_profile();
    else if (cfg.profile != "default") fail(ErrorKind::config, "unknown profile '" + cfg.profile + "'");
    options.k = cfg.k;
    options.condense = cfg.condense;
    options.threads = cfg.threads;
    if (cfg.solver == "cg") options.solver = LinearSolver::cg;
    else if (cfg.solver == "direct") options.solver = LinearSolver::direct;
    else fail(ErrorKind::config, "unknown solver '" + cfg.solver + "'");
    if (!(cfg.tol > 0.0)) fail(ErrorKind::config, "tol must be positive");
    options.cg.tol = cfg.tol;
    options.cg.maxit = cfg.maxit;
    return options;
}

inline MeshFamily family_of(const RunConfig& cfg)
{
    MeshFamily f;
    f.kind = mesh_kind_from_string(cfg.family);
    f.levels = cfg.levels;
    f.lloyd_iters = cfg.lloyd;
    f.seed = cfg.seed;
    return f;
}

inline std::vector<ErrorColumn> columns_of(const RunConfig& cfg)
{
    if (cfg.columns == "triangle") return triangle_table_columns();
    if (cfg.columns == "polygon") return polygon_table_columns();
    if (cfg.columns != "auto") fail(ErrorKind::config, "unknown column set '" + cfg.columns + "'");
    return cfg.family == "triangles" && cfg.k == 0 ? triangle_table_columns() : polygon_table_columns();
}

/// Files are staged under "<path>.tmp" and renamed into place only after every
/// file of the command has been written, so a failing command leaves no
/// partial output behind.
class StagedOutput {
public:
    StagedOutput() = default;
    StagedOutput(const StagedOutput&) = delete;
    StagedOutput& operator=(const StagedOutput&) = delete;

    ~StagedOutput()
    {
        std::error_code ec;
        for (const auto& p : staged_)
            std::filesystem::remove(tmp_path(p), ec);
    }

    void write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body)
    {
        const auto tmp = tmp_path(path);
        staged_.push_back(path);
        {
            std::ofstream os(tmp);
            if (!os) fail(ErrorKind::io, "cannot write '" + tmp.string() + "'");
            body(os);
            os.flush();
            if (!os) fail(ErrorKind::io, "write to '" + tmp.string() + "' failed");
        }
    }

    void commit()
    {
        for (const auto& p : staged_)
            std::filesystem::rename(tmp_path(p), p);
        staged_.clear();
    }

private:
    static std::filesystem::path tmp_path(const std::filesystem::path& p) { return p.string() + ".tmp"; }
    std::vector<std::filesystem::path> staged_;
};

inline void write_solve_report(std::ostream& os, const SolveReport& r, bool condensed, double assembly_seconds)
{
    os << "method " << r.method << '\n'
       << "condensed " << (condensed ? "yes" : "no") << '\n'
       << "iterations " << r.iterations << '\n'
       << "relative_residual " << detail::sci(r.relative_residual) << '\n'
       << "assembly_seconds " << assembly_seconds << '\n'
       << "solve_seconds " << r.seconds << '\n';
}

inline void write_error_report(std::ostream& os, const ErrorNorms& e, int k)
{
    os << "e_1h " << detail::sci(e.energy) << '\n'
       << "e_L2 " << detail::sci(e.l2) << '\n'
       << "e_sigma_0h " << detail::sci(e.flux_0h) << '\n'
       << "e_sigma_L2 " << detail::sci(e.flux_l2) << '\n';
    if (k == 0) os << "e_u_cr " << detail::sci(e.cr_l2) << '\n';
}

} // namespace stagpoly
