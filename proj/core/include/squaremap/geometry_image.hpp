#pragma once

#include "squaremap/solver.hpp"

#include <complex>
#include <string>

namespace sqm {

/// Regular n x n grid of interpolated surface positions over the unit
/// square. Sample (i, j) sits at (i / (n-1), j / (n-1)), so the first and
/// last rows and columns lie exactly on the square boundary and the two
/// sides of the cut seam sample identical surface points. Row j = 0 is the
/// bottom edge (v = 0).
struct GeometryImage {
  int n = 0;
  int genus = 0;
  std::vector<Vec3> samples;  // n * n, index j * n + i
  Vec3 channel_min = Vec3::Zero();
  Vec3 channel_max = Vec3::Zero();
  int fallback_pixels = 0;  // samples located by nearest-triangle fallback

  const Vec3& at(int i, int j) const { return samples[j * n + i]; }
  Vec3& at(int i, int j) { return samples[j * n + i]; }
};

/// Samples the surface through a bijective parameterization. Point location
/// uses a uniform grid over the image triangles with a 1e-12 barycentric
/// slack; samples in no triangle fall back to the nearest triangle and are
/// counted in fallback_pixels.
GeometryImage encode(const TriMesh& mesh, const ParamMap& f, int n,
                     int genus, int threads = 1);

struct DecodeResult {
  TriMesh mesh;
  bool welded = true;          // false: seam mismatch, emitted open
  double max_weld_error = 0.0; // worst sample-to-average distance
};

/// Rebuilds a mesh from the grid: n^2 samples plus one center vertex per
/// quad (average of its four corners), four triangles per quad, and the
/// genus-dependent seam welding (genus 0 folds bottom onto left and right
/// onto top; genus 1 identifies opposite edges). Identified samples farther
/// than 1e-3 x bbox diagonal from their average leave the mesh open.
DecodeResult decode(const GeometryImage& img);

/// 16-bit RGB PNG plus a JSON sidecar holding the quantization ranges,
/// resolution, genus, and fallback count.
void save_geometry_image(const GeometryImage& img, const std::string& png_path,
                         const std::string& json_path);
GeometryImage load_geometry_image(const std::string& png_path,
                                  const std::string& json_path);

/// Lossless float container (magic "GIMF"), selectable behind a CLI flag.
void save_geometry_image_f32(const GeometryImage& img, const std::string& path);
GeometryImage load_geometry_image_f32(const std::string& path);

/// Per-face Beltrami coefficients of the affine maps between two
/// parameterizations of the same mesh. |mu| < 1 iff the face map preserves
/// orientation; mu = 0 iff it is conformal.
struct BeltramiField {
  std::vector<std::complex<double>> mu;
};

BeltramiField beltrami_coefficient(const TriMesh& mesh, const ParamMap& from,
                                   const ParamMap& to);

/// Caps coefficient magnitudes at delta, preserving the argument. Exact
/// fixed point: truncating twice equals truncating once.
BeltramiField truncate_beltrami(const BeltramiField& field, double delta);

/// Reconstructs a map with prescribed Beltrami coefficients relative to
/// f_from: solves div(A grad u) = 0 per coordinate on the f_from domain,
/// where A is the SPD coefficient matrix of mu, under the square boundary
/// constraints (free segment variables reduced through FreeLayout).
ParamMap reconstruct_from_beltrami(const TriMesh& mesh, const ParamMap& f_from,
                                   const BeltramiField& mu,
                                   const BoundarySegments& segments);

/// truncate_beltrami followed by reconstruct_from_beltrami.
ParamMap truncate_and_reconstruct(const TriMesh& mesh, const ParamMap& f_from,
                                  const BeltramiField& mu, double delta,
                                  const BoundarySegments& segments);

/// pcg_minimize with the constant area measure: drives all image faces
/// toward equal area rather than equal area ratio.
SolveResult constant_area_param(const TriMesh& mesh,
                                const BoundarySegments& segments,
                                const SolverConfig& cfg);

}  // namespace sqm
