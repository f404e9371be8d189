#pragma once

#include "assembly.hpp"
#include "basis.hpp"
#include "coefficient.hpp"
#include "convergence.hpp"
#include "condensation.hpp"
#include "cr.hpp"
#include "driver.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "mesh_io.hpp"
#include "polymesh.hpp"
#include "postprocess.hpp"
#include "problems.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "subtriangulation.hpp"
#include "voronoi.hpp"
#include "vtk.hpp"
#include "weakgrad.hpp"
