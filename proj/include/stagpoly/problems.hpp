#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "coefficient.hpp"
#include "error.hpp"
#include "polymesh.hpp"
#include "postprocess.hpp"

namespace stagpoly {

/// Model problem -div(K grad u) = f with boundary data and, when known, the
/// exact solution.
struct Problem {
    std::string name;
    ScalarFn f;
    BoundarySpec bc;
    /// Coefficient for a given mesh (cell-wise data needs the cells).
    std::function<CoefficientField(const PolyMesh&)> coefficient = [](const PolyMesh&) {
        return CoefficientField::identity();
    };
    FluxSign flux_sign = FluxSign::potential;
    ScalarFn exact;   // empty when unknown
    GradFn exact_grad;

    bool has_exact() const { return static_cast<bool>(exact); }
};

namespace detail {
inline constexpr double pi = std::numbers::pi;
}

/// u = cos(pi x) cos(pi y) with its own Dirichlet data.
inline Problem example1()
{
    using detail::pi;
    Problem p;
    p.name = "example1";
    p.exact = [](const Point2& x) { return std::cos(pi * x.x()) * std::cos(pi * x.y()); };
    p.exact_grad = [](const Point2& x) {
        return Vector2(-pi * std::sin(pi * x.x()) * std::cos(pi * x.y()),
                       -pi * std::cos(pi * x.x()) * std::sin(pi * x.y()));
    };
    p.f = [](const Point2& x) { return 2.0 * pi * pi * std::cos(pi * x.x()) * std::cos(pi * x.y()); };
    p.bc = BoundarySpec::dirichlet_everywhere(p.exact);
    return p;
}

/// u = cos(pi x) cos(pi y) - 1.
inline Problem example2()
{
    Problem p = example1();
    p.name = "example2";
    p.exact = [](const Point2& x) {
        return std::cos(detail::pi * x.x()) * std::cos(detail::pi * x.y()) - 1.0;
    };
    p.bc = BoundarySpec::dirichlet_everywhere(p.exact);
    return p;
}

inline constexpr double example3_low_kappa = 1e-3;

inline bool example3_in_block(const Point2& x)
{
    return x.x() > 0.375 && x.x() < 0.625 && x.y() > 0.25 && x.y() < 0.75;
}

/// Darcy flow through the unit square: u = 1 on the left, u = 0 on the right,
/// no flow through top and bottom, kappa = 1e-3 in a block and 1 elsewhere.
inline Problem example3()
{
    Problem p;
    p.name = "example3";
    p.f = [](const Point2&) { return 0.0; };
    p.bc.fallback(std::nullopt)
        .dirichlet(tag_left, [](const Point2&) { return 1.0; })
        .dirichlet(tag_right)
        .neumann(tag_bottom)
        .neumann(tag_top);
    p.coefficient = [](const PolyMesh& mesh) {
        std::vector<double> kappa(mesh.cells.size());
        for (int c = 0; c < mesh.num_cells(); ++c)
            kappa[c] = example3_in_block(area_centroid(mesh.cell_points(c))) ? example3_low_kappa : 1.0;
        return CoefficientField::per_cell_scalar(std::move(kappa));
    };
    p.flux_sign = FluxSign::darcy;
    return p;
}

/// u = 1 + 2x - 3y; reproduced exactly for every k.
inline Problem linear_patch()
{
    Problem p;
    p.name = "linear";
    p.exact = [](const Point2& x) { return 1.0 + 2.0 * x.x() - 3.0 * x.y(); };
    p.exact_grad = [](const Point2&) { return Vector2(2.0, -3.0); };
    p.f = [](const Point2&) { return 0.0; };
    p.bc = BoundarySpec::dirichlet_everywhere(p.exact);
    return p;
}

/// u = x^2 + xy - 2y^2 + x, f = 2; reproduced exactly for k >= 1.
inline Problem quadratic_patch()
{
    Problem p;
    p.name = "quadratic";
    p.exact = [](const Point2& x) {
        return x.x() * x.x() + x.x() * x.y() - 2.0 * x.y() * x.y() + x.x();
    };
    p.exact_grad = [](const Point2& x) { return Vector2(2.0 * x.x() + x.y() + 1.0, x.x() - 4.0 * x.y()); };
    p.f = [](const Point2&) { return 2.0; };
    p.bc = BoundarySpec::dirichlet_everywhere(p.exact);
    return p;
}

inline Problem problem_by_name(const std::string& name)
{
    if (name == "example1") return example1();
    if (name == "example2") return example2();
    if (name == "example3") return example3();
    if (name == "linear") return linear_patch();
    if (name == "quadratic") return quadratic_patch();
    fail(ErrorKind::config, "unknown problem '" + name + "'");
}

/// Reference errors of the first example on the structured triangle family.
struct GoldenRow {
    double h;
    int cells;
    double flux_error;
    double u_error;
};

inline constexpr std::array<GoldenRow, 5> example1_golden{{
    {2.500e-01, 32, 6.03095e-01, 2.54911e-02},
    {1.250e-01, 128, 3.02359e-01, 6.33303e-03},
    {6.250e-02, 512, 1.51292e-01, 1.58159e-03},
    {3.125e-02, 2048, 7.56601e-02, 3.95307e-04},
    {1.562e-02, 8192, 3.78319e-02, 9.88212e-05},
}};

/// First reference row of the second example (e_1h, e_L2, e_sigma_0h at 64 cells).
struct GoldenPolygonRow {
    double h;
    int cells;
    double energy;
    double l2;
    double flux_0h;
};

inline constexpr GoldenPolygonRow example2_golden_first{1.250e-01, 64, 4.18367e-01, 9.86917e-03, 8.15496e-01};

} // namespace stagpoly
