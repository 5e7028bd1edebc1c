#pragma once

#include "squaremap/energy.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include <cstdint>
#include <memory>
#include <vector>

namespace sqm {

struct SolverConfig {
  int fpm_iters = 10;       // reweighted fixed-point rounds after the harmonic solve
  int max_iters = 200;      // conjugate-gradient iteration cap
  double energy_tol = 1e-6; // stop when the energy deficit drops below this
  double grad_tol = 1e-8;   // stop when ||g||_{M^-1} drops below this
  double wolfe_c1 = 1e-4;   // sufficient-decrease constant (also the Armijo test)
  double wolfe_c2 = 0.4;    // curvature constant, logged only
  double alpha0 = 1.0;      // first line-search trial step
  int reinterp_max = 3;     // re-interpolation attempts per line search

  void validate() const;
};

/// One logged iteration. phase is 'F' for fixed-point rounds and 'C' for
/// conjugate-gradient steps. The Wolfe booleans are diagnostics: the line
/// search enforces only the sufficient-decrease test.
struct TrajectoryRow {
  int iter = 0;
  char phase = 'F';
  double e_s = 0.0;
  double e_a = 0.0;
  double area = 0.0;
  double weighted_var = 0.0;
  double unweighted_var = 0.0;
  double r_mean = 0.0;
  double r_sd = 0.0;
  int folds = 0;
  double alpha = 0.0;
  int armijo_ok = -1;        // -1 where no line search ran
  int wolfe_curvature = -1;
};

/// Uniform boundary values: u along E spaced evenly in [0, 1], v along F
/// likewise, all other boundary coordinates filled in from the constraints.
/// Interior entries are zero.
ParamMap initial_boundary(const BoundarySegments& segments, int n);

struct FixedPointResult {
  ParamMap map;
  ParamMap harmonic;  // output of the very first solve (identity weights)
  std::vector<TrajectoryRow> rows;
};

/// Fixed-point initialization: solve L_II f_I = -L_IB f_B with L from the
/// identity map first (the harmonic map), then cfg.fpm_iters more rounds
/// re-assembling L from the current map.
FixedPointResult fixed_point_init(const TriMesh& mesh,
                                  const BoundarySegments& segments,
                                  const SolverConfig& cfg,
                                  const AreaMeasure& rho);

/// Block-diagonal preconditioner from the stretch Laplacian of the initial
/// map: one interior block applied to each coordinate plus one block per
/// free boundary segment (corner rows removed). Each block is factored once
/// with a fill-reducing (AMD) ordering and held constant afterwards.
class Preconditioner {
 public:
  Preconditioner(const TriMesh& mesh, const ParamMap& f0,
                 const AreaMeasure& rho, const FreeLayout& layout);

  Eigen::VectorXd solve(const Eigen::VectorXd& g) const;

  bool regularized() const { return regularized_; }

  /// FNV-1a hash over the factor values; used to verify the factors never
  /// change during an optimization run.
  uint64_t fingerprint() const;

  int block_count() const { return 3; }
  const SparseMat& block(int i) const { return blocks_[i]; }
  const Eigen::SimplicialLLT<SparseMat, Eigen::Lower,
                             Eigen::AMDOrdering<int>>& factor(int i) const {
    return *factors_[i];
  }

 private:
  using LLT = Eigen::SimplicialLLT<SparseMat, Eigen::Lower,
                                   Eigen::AMDOrdering<int>>;
  void factor_block(int i);

  const FreeLayout* layout_;
  std::array<SparseMat, 3> blocks_;  // interior, E-interior, F-interior
  std::array<std::unique_ptr<LLT>, 3> factors_;
  bool regularized_ = false;
};

/// Minimizer of the quadratic through (0, phi0) with slope dphi0 and
/// (alpha_prev, phi_prev). Falls back to alpha_prev / 2 when the
/// interpolant is not convex or the minimizer leaves (0, 10 alpha_prev].
double quadratic_step(double phi0, double dphi0, double alpha_prev,
                      double phi_prev, bool* fell_back = nullptr);

struct SolveResult {
  ParamMap map;
  ParamMap harmonic;
  RatioStats harmonic_stats;
  RatioStats final_stats;
  std::vector<TrajectoryRow> trajectory;
  int cg_iterations = 0;
  bool stopped_on_energy = false;
  bool stopped_on_gradient = false;
  bool aborted_nonfinite = false;
  int linesearch_failures = 0;   // steps accepted without sufficient decrease
  bool preconditioner_regularized = false;
  uint64_t precond_fingerprint_initial = 0;
  uint64_t precond_fingerprint_final = 0;
};

/// Preconditioned nonlinear conjugate gradient minimization of the stretch
/// energy under the square boundary constraints, starting from the
/// fixed-point initialization. The boundary constraints are re-imposed
/// exactly after every step.
SolveResult pcg_minimize(const TriMesh& mesh, const BoundarySegments& segments,
                         const SolverConfig& cfg, const AreaMeasure& rho);

}  // namespace sqm
