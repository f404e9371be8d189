#pragma once

#include <ostream>

#include "basis.hpp"
#include "polymesh.hpp"
#include "postprocess.hpp"
#include "subtriangulation.hpp"

namespace stagpoly {

/// Legacy VTK unstructured grid on the fan triangles. Each triangle gets its
/// own three points so the discontinuous u_0 can be sampled per cell; sigma_h
/// is written at the triangle centroids as cell data.
inline void write_vtk(std::ostream& os, const PolyMesh& mesh, const SubTriangulation& sub, const SolutionField& u,
                      const FluxField& flux)
{
    const std::size_t ntri = sub.triangles.size();
    os << "# vtk DataFile Version 3.0\nstagpoly solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os.precision(17);
    os << "POINTS " << 3 * ntri << " double\n";
    for (const auto& t : sub.triangles) {
        const Point2& s = sub.cells[t.cell].star;
        os << s.x() << ' ' << s.y() << " 0\n"
           << t.a.x() << ' ' << t.a.y() << " 0\n"
           << t.b.x() << ' ' << t.b.y() << " 0\n";
    }
    os << "CELLS " << ntri << ' ' << 4 * ntri << '\n';
    for (std::size_t i = 0; i < ntri; ++i)
        os << "3 " << 3 * i << ' ' << 3 * i + 1 << ' ' << 3 * i + 2 << '\n';
    os << "CELL_TYPES " << ntri << '\n';
    for (std::size_t i = 0; i < ntri; ++i)
        os << "5\n";

    os << "POINT_DATA " << 3 * ntri << "\nSCALARS u0 double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const ScaledMonomials cb = cell_basis(sub, c, u.degree());
        const Eigen::VectorXd u0 = u.cell_coeffs(c);
        for (const auto& t : sub.fan(c))
            os << cb.eval(sub.cells[c].star).dot(u0) << '\n' << cb.eval(t.a).dot(u0) << '\n' << cb.eval(t.b).dot(u0) << '\n';
    }
    os << "CELL_DATA " << ntri << "\nVECTORS sigma double\n";
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const auto fan = sub.fan(c);
        for (int i = 0; i < static_cast<int>(fan.size()); ++i) {
            const Vector2 v = flux.value(sub, c, i, fan[i].centroid);
            os << v.x() << ' ' << v.y() << " 0\n";
        }
    }
    os << "SCALARS cell int 1\nLOOKUP_TABLE default\n";
    for (const auto& t : sub.triangles)
        os << t.cell << '\n';
}

} // namespace stagpoly
