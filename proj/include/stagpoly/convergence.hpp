#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "driver.hpp"
#include "error.hpp"
#include "polymesh.hpp"
#include "postprocess.hpp"
#include "problems.hpp"
#include "voronoi.hpp"

namespace stagpoly {

enum class MeshKind { triangles, squares, voronoi, delaunay };

inline MeshKind mesh_kind_from_string(const std::string& name)
{
    if (name == "triangles") return MeshKind::triangles;
    if (name == "squares") return MeshKind::squares;
    if (name == "voronoi") return MeshKind::voronoi;
    if (name == "delaunay") return MeshKind::delaunay;
    fail(ErrorKind::config, "unknown mesh family '" + name + "'");
}

/// A refinement family. A level is n for the structured families (n x n
/// squares, 2 n^2 triangles), the seed count for Voronoi meshes and the
/// interior point count for Delaunay meshes.
struct MeshFamily {
    MeshKind kind = MeshKind::triangles;
    std::vector<int> levels;
    int lloyd_iters = 100;
    std::uint64_t seed = 1;

    PolyMesh make(int level) const
    {
        switch (kind) {
        case MeshKind::triangles: return gen_uniform_triangles(level);
        case MeshKind::squares: return gen_uniform_squares(level);
        case MeshKind::voronoi: return gen_voronoi_polygons(level, lloyd_iters, seed);
        case MeshKind::delaunay: return gen_delaunay_triangles(level, seed);
        }
        fail(ErrorKind::config, "unknown mesh family");
    }
};

enum class ErrorColumn {
    energy,  // ||u - u_h||_{1,h}
    l2,      // ||u - u_0||
    flux_0h, // ||sigma - sigma_h||_{0,h}
    flux_l2, // ||sigma - sigma_h||
    cr_l2,   // ||u - E_h u_h||
};

inline std::string column_name(ErrorColumn c)
{
    switch (c) {
    case ErrorColumn::energy: return "e_1h";
    case ErrorColumn::l2: return "e_L2";
    case ErrorColumn::flux_0h: return "e_sigma_0h";
    case ErrorColumn::flux_l2: return "e_sigma_L2";
    case ErrorColumn::cr_l2: return "e_u_cr";
    }
    return "?";
}

inline double column_value(const ErrorNorms& e, ErrorColumn c)
{
    switch (c) {
    case ErrorColumn::energy: return e.energy;
    case ErrorColumn::l2: return e.l2;
    case ErrorColumn::flux_0h: return e.flux_0h;
    case ErrorColumn::flux_l2: return e.flux_l2;
    case ErrorColumn::cr_l2: return e.cr_l2;
    }
    return 0.0;
}

/// Columns of the triangle table (flux, then u) and of the polygon table
/// (energy, u, boundary-augmented flux).
inline std::vector<ErrorColumn> triangle_table_columns() { return {ErrorColumn::flux_l2, ErrorColumn::cr_l2}; }
inline std::vector<ErrorColumn> polygon_table_columns()
{
    return {ErrorColumn::energy, ErrorColumn::l2, ErrorColumn::flux_0h};
}

struct ConvergenceRow {
    double h = 0.0;
    int cells = 0;
    std::vector<double> errors;
    std::vector<std::optional<double>> rates; // empty on the first row
    SolveReport solve;
};

struct ConvergenceReport {
    std::vector<ErrorColumn> columns;
    std::vector<ConvergenceRow> rows;
};

/// Rate between consecutive levels measured against N_K^{-1/2}, which is
/// log2(e_{2h}/e_h) for a uniform refinement and stays meaningful on
/// unstructured families where h does not halve exactly.
inline double observed_rate(double e_coarse, double e_fine, int n_coarse, int n_fine)
{
    return 2.0 * std::log(e_coarse / e_fine) / std::log(static_cast<double>(n_fine) / n_coarse);
}

inline ConvergenceReport convergence_study(const Problem& problem, const MeshFamily& family,
                                           const std::vector<ErrorColumn>& columns,
                                           const SolveOptions& options = {},
                                           NormQuadrature mode = NormQuadrature::midpoint)
{
    if (!problem.has_exact()) fail(ErrorKind::config, "problem '" + problem.name + "' has no exact solution");
    if (family.levels.empty()) fail(ErrorKind::config, "convergence study needs at least one level");
    ConvergenceReport report;
    report.columns = columns;
    for (int level : family.levels) {
        try {
            const PolyMesh mesh = family.make(level);
            const SolveOutcome out = solve_problem(mesh, problem, options);
            const ErrorNorms e = solve_errors(mesh, problem, out, mode);
            ConvergenceRow row;
            row.h = mesh.mesh_size;
            row.cells = mesh.num_cells();
            row.solve = out.report;
            for (ErrorColumn c : columns)
                row.errors.push_back(column_value(e, c));
            if (!report.rows.empty()) {
                const ConvergenceRow& prev = report.rows.back();
                for (std::size_t j = 0; j < columns.size(); ++j)
                    row.rates.push_back(observed_rate(prev.errors[j], row.errors[j], prev.cells, row.cells));
            }
            report.rows.push_back(std::move(row));
        } catch (const SolveError& ex) {
            throw SolveError(ex.kind(), "level " + std::to_string(level) + ": " + ex.what(), ex.report());
        } catch (const Error& ex) {
            throw Error(ex.kind(), "level " + std::to_string(level) + ": " + ex.what());
        }
    }
    return report;
}

namespace detail {
inline std::string sci(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", x);
    return buf;
}
inline std::string fixed2(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}
} // namespace detail

/// CSV with columns h, N_K, then an error/rate pair per norm. The optional
/// header line starts with '#'.
inline void write_csv(std::ostream& os, const ConvergenceReport& report, const std::string& comment = {})
{
    if (!comment.empty()) os << "# " << comment << '\n';
    os << "h,N_K";
    for (ErrorColumn c : report.columns)
        os << ',' << column_name(c) << ',' << column_name(c) << "_rate";
    os << '\n';
    for (const auto& row : report.rows) {
        os << detail::sci(row.h) << ',' << row.cells;
        for (std::size_t j = 0; j < row.errors.size(); ++j) {
            os << ',' << detail::sci(row.errors[j]) << ',';
            if (j < row.rates.size() && row.rates[j]) os << detail::fixed2(*row.rates[j]);
        }
        os << '\n';
    }
}

/// Side-by-side comparison of a triangle-table report with the reference
/// values of the first example; rows are matched by cell count.
inline void write_reference_comparison(std::ostream& os, const ConvergenceReport& report)
{
    os << "N_K,e_sigma,ref_e_sigma,rel_diff_sigma,e_u,ref_e_u,rel_diff_u\n";
    for (const auto& row : report.rows) {
        for (const auto& g : example1_golden) {
            if (g.cells != row.cells || row.errors.size() < 2) continue;
            os << row.cells << ',' << detail::sci(row.errors[0]) << ',' << detail::sci(g.flux_error) << ','
               << detail::sci(row.errors[0] / g.flux_error - 1.0) << ',' << detail::sci(row.errors[1]) << ','
               << detail::sci(g.u_error) << ',' << detail::sci(row.errors[1] / g.u_error - 1.0) << '\n';
        }
    }
}

} // namespace stagpoly
