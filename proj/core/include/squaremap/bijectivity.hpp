#pragma once

#include "squaremap/energy.hpp"

namespace sqm {

/// Folded faces: image signed area (under the stored face orientation)
/// at or below 1e-15.
struct FoldReport {
  int count = 0;
  std::vector<int> faces;
};

FoldReport count_folded(const TriMesh& mesh, const ParamMap& f);

/// Mean-value-weight Laplacian on the image: off-diagonal (i, j) sums
/// -tan(gamma/2) / ||f_i - f_j|| over the faces [v_i, v_j, v_k], with gamma
/// the image angle at f_i between the edges to f_j and f_k. Structurally
/// symmetric but numerically nonsymmetric; all off-diagonals negative.
/// Near-degenerate angles (>= pi - 1e-9) are clamped and reported.
struct MeanValueLaplacian {
  SparseMat L;
  std::vector<int> clamped_faces;
};

MeanValueLaplacian mean_value_laplacian(const TriMesh& mesh,
                                        const ParamMap& f);

/// Replaces the interior of f by the solution of the mean-value system
/// L_II f_I = -L_IB f_B. With the boundary on the convex unit square the
/// result is a convex-combination map, hence fold-free. Boundary values are
/// returned bit-identical.
ParamMap correct_overlaps(const TriMesh& mesh, const ParamMap& f,
                          const BoundarySegments& segments);

}  // namespace sqm
