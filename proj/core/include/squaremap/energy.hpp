#pragma once

#include "squaremap/slicer.hpp"
#include "squaremap/tri_mesh.hpp"

#include <vector>

namespace sqm {

/// Piecewise-affine map into the plane, one (u, v) pair per vertex.
struct ParamMap {
  Eigen::VectorXd u, v;

  int size() const { return static_cast<int>(u.size()); }
  Vec2 at(int i) const { return Vec2(u[i], v[i]); }
};

/// Strictly positive per-face measure weighting the stretch energy.
/// face_areas gives the classical energy; constant(mesh) distributes the
/// total surface area uniformly, which drives all image faces toward equal
/// area instead of equal area ratio.
struct AreaMeasure {
  Eigen::VectorXd rho;

  static AreaMeasure face_areas(const TriMesh& mesh);
  static AreaMeasure constant(const TriMesh& mesh);
};

/// Measure-weighted stretch Laplacian. Off-diagonal (i, j) sums
/// -cot(theta_ij^k) / 2 * |f(tau)| / rho(tau) over the faces containing the
/// edge, with the angle measured on the image triangle; the diagonal is the
/// negated row sum. Degenerate image triangles are clamped (area to 1e-14,
/// |cot| to 1e8) and reported in clamped_faces.
struct StretchLaplacian {
  SparseMat L;
  std::vector<int> clamped_faces;
};

StretchLaplacian stretch_laplacian(const TriMesh& mesh, const ParamMap& f,
                                   const AreaMeasure& rho);

/// Stretch Laplacian of the identity map: angles and areas taken from the
/// 3D mesh itself, so the per-face weight is |tau| / rho(tau). With
/// rho = face areas this is the classical cotangent Laplacian.
SparseMat stretch_laplacian_identity(const TriMesh& mesh,
                                     const AreaMeasure& rho);

/// sum over faces of |f(tau)|^2 / rho(tau).
double stretch_energy(const TriMesh& mesh, const ParamMap& f,
                      const AreaMeasure& rho);

/// Total unsigned image area A(f); folds inflate it.
double image_area(const TriMesh& mesh, const ParamMap& f);

/// E_A = (|M| / A(f)) E_S(f) - A(f) with rho = face areas. Nonnegative,
/// zero exactly for area-preserving maps.
double authalic_energy(const TriMesh& mesh, const ParamMap& f);

/// Distortion statistics of the per-face area ratios r = |f(tau)| / |tau|.
/// weighted_* use area weights |tau| / |M|; r_area_* describe the
/// normalized ratio R = (|f(tau)| / A) / (|tau| / |M|). variance_bound is
/// A * E_A / (m |M| min|tau|), an upper bound for unweighted_variance.
struct RatioStats {
  double weighted_mean = 0.0;
  double weighted_variance = 0.0;
  double unweighted_mean = 0.0;
  double unweighted_variance = 0.0;
  double r_area_mean = 0.0;
  double r_area_sd = 0.0;
  double min_source_area = 0.0;
  double variance_bound = 0.0;
};

RatioStats ratio_statistics(const TriMesh& mesh, const ParamMap& f);

/// Reduction of the square boundary constraints to free variables.
///
/// The free vector is x = [u_I; v_I; u_E interior; v_F interior]; corners
/// are pinned, boundary segments keep one coordinate fixed, and the
/// identified segments (H/G for genus 0, G/H for genus 1) mirror the E/F
/// entries. The full map is the affine expansion [u; v] = P x + c, so
/// gradients reduce by P^T and quadratic forms by P^T (.) P.
class FreeLayout {
 public:
  FreeLayout(const TriMesh& mesh, const BoundarySegments& segments);

  int free_size() const { return nfree_; }
  int interior_count() const { return static_cast<int>(interior_.size()); }
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<int>& boundary() const { return boundary_; }
  const BoundarySegments& segments() const { return segments_; }

  const SparseMat& P() const { return P_; }
  const Eigen::VectorXd& c() const { return c_; }

  ParamMap expand(const Eigen::VectorXd& x) const;
  Eigen::VectorXd restrict(const ParamMap& f) const;

  /// P^T g for a stacked full gradient [g_u; g_v].
  Eigen::VectorXd reduce_gradient(const Eigen::VectorXd& gu,
                                  const Eigen::VectorXd& gv) const;

  /// Reduced quadratic form: K = P_u^T L P_u + P_v^T L P_v and the matching
  /// right-hand side -(P_u^T L c_u + P_v^T L c_v), for solving
  /// argmin_x 1/2 [u;v]^T blockdiag(L, L) [u;v] subject to the constraints.
  void reduce_quadratic(const SparseMat& L, SparseMat* K,
                        Eigen::VectorXd* rhs) const;

  /// Throws if f violates the boundary constraints beyond tol.
  void check_constraints(const ParamMap& f, double tol = 1e-9) const;

  // Offsets of the segment variables inside the free vector.
  int e_offset() const { return 2 * static_cast<int>(interior_.size()); }
  int f_offset() const {
    return e_offset() + static_cast<int>(segments_.E.size()) - 2;
  }

 private:
  BoundarySegments segments_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  int n_ = 0;
  int nfree_ = 0;
  SparseMat P_;       // 2n x nfree
  Eigen::VectorXd c_; // 2n
};

/// Free-variable gradient of the stretch energy: P^T (2 L u; 2 L v).
/// Rejects maps that violate the boundary constraints beyond 1e-9.
Eigen::VectorXd stretch_gradient(const TriMesh& mesh, const ParamMap& f,
                                 const AreaMeasure& rho,
                                 const FreeLayout& layout,
                                 std::vector<int>* clamped_faces = nullptr);

}  // namespace sqm
