#pragma once

#include "squaremap/slicer.hpp"
#include "squaremap/tri_mesh.hpp"

namespace sqm {

/// Regular icosahedron with the given edge length, centered at the origin.
TriMesh make_icosahedron(double edge = 1.0);

/// Icosahedron subdivided `subdiv` times (4x faces per level), with the
/// vertices projected onto the sphere of the given radius.
TriMesh make_icosphere(int subdiv, double radius = 1.0);

/// Structured torus grid with nu x nv vertices and 2*nu*nv faces.
/// nu runs around the major (axial) circle, nv around the tube.
TriMesh make_torus(int nu, int nv, double major_radius = 2.0,
                   double minor_radius = 1.0);

/// Canonical cut loops for make_torus output: a tube (minor) loop and an
/// axial (major) loop, sharing exactly the base vertex 0.
std::pair<CutPath, CutPath> canonical_torus_loops(int nu, int nv);

/// Flat unit-square grid in the z = 0 plane with (k+1)^2 vertices.
TriMesh make_flat_grid(int k);

/// Boundary segments of make_flat_grid(k) mapped to the unit square in the
/// natural way (bottom/right/top/left). Convenient for solver tests on an
/// already parameterized flat mesh.
BoundarySegments flat_grid_segments(int k);

}  // namespace sqm
