#include "squaremap/solver.hpp"

#include "squaremap/bijectivity.hpp"
#include "sparse_util.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace sqm {

void SolverConfig::validate() const {
  if (fpm_iters < 0 || max_iters < 0 || reinterp_max < 0) {
    throw Error("iteration counts must be nonnegative");
  }
  if (!(energy_tol > 0) || !(grad_tol > 0) || !(alpha0 > 0)) {
    throw Error("tolerances and alpha0 must be positive");
  }
  if (!(0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 0.5)) {
    throw Error("Wolfe constants must satisfy 0 < c1 < c2 < 1/2");
  }
}

ParamMap initial_boundary(const BoundarySegments& seg, int n) {
  if (seg.E.size() < 2 || seg.F.size() < 2) {
    throw Error("boundary segment too short");
  }
  ParamMap f;
  f.u = Eigen::VectorXd::Zero(n);
  f.v = Eigen::VectorXd::Zero(n);
  const bool genus0 = seg.genus == 0;

  for (size_t t = 0; t < seg.E.size(); ++t) {
    const double val = static_cast<double>(t) / (seg.E.size() - 1);
    const int e = seg.E[t];
    f.u[e] = val;
    f.v[e] = 0.0;
    const int partner = genus0 ? seg.H[t] : seg.G[t];
    if (genus0) {
      f.u[partner] = 0.0;
      f.v[partner] = val;
    } else {
      f.u[partner] = val;
      f.v[partner] = 1.0;
    }
  }
  for (size_t t = 0; t < seg.F.size(); ++t) {
    const double val = static_cast<double>(t) / (seg.F.size() - 1);
    const int ff = seg.F[t];
    f.u[ff] = 1.0;
    f.v[ff] = val;
    const int partner = genus0 ? seg.G[t] : seg.H[t];
    if (genus0) {
      f.u[partner] = val;
      f.v[partner] = 1.0;
    } else {
      f.u[partner] = 0.0;
      f.v[partner] = val;
    }
  }
  return f;
}

namespace {

TrajectoryRow make_row(const TriMesh& mesh, const ParamMap& f,
                       const AreaMeasure& rho, int iter, char phase,
                       double alpha = 0.0, int armijo = -1, int wolfe2 = -1) {
  TrajectoryRow row;
  row.iter = iter;
  row.phase = phase;
  row.e_s = stretch_energy(mesh, f, rho);
  row.e_a = authalic_energy(mesh, f);
  row.area = image_area(mesh, f);
  RatioStats st = ratio_statistics(mesh, f);
  row.weighted_var = st.weighted_variance;
  row.unweighted_var = st.unweighted_variance;
  row.r_mean = st.r_area_mean;
  row.r_sd = st.r_area_sd;
  row.folds = count_folded(mesh, f).count;
  row.alpha = alpha;
  row.armijo_ok = armijo;
  row.wolfe_curvature = wolfe2;
  return row;
}

}  // namespace

FixedPointResult fixed_point_init(const TriMesh& mesh,
                                  const BoundarySegments& segments,
                                  const SolverConfig& cfg,
                                  const AreaMeasure& rho) {
  cfg.validate();
  const int n = mesh.vertex_count();

  std::vector<bool> on_boundary(n, false);
  for (const auto* seg : {&segments.E, &segments.F, &segments.G, &segments.H}) {
    for (int v : *seg) on_boundary[v] = true;
  }
  std::vector<int> interior, boundary;
  for (int v = 0; v < n; ++v) (on_boundary[v] ? boundary : interior).push_back(v);
  if (interior.empty()) throw Error("mesh has no interior vertices");

  FixedPointResult result;
  result.map = initial_boundary(segments, n);

  Eigen::SimplicialLDLT<SparseMat> solver;
  bool analyzed = false;

  auto solve_round = [&](const SparseMat& L) {
    SparseMat L_ii = detail::submatrix(L, interior, interior);
    SparseMat L_ib = detail::submatrix(L, interior, boundary);
    if (!analyzed) {
      solver.analyzePattern(L_ii);
      analyzed = true;
    }
    solver.factorize(L_ii);
    if (solver.info() != Eigen::Success) {
      throw Error("fixed-point system is singular (disconnected interior)");
    }
    const Eigen::VectorXd bu = detail::gather(result.map.u, boundary);
    const Eigen::VectorXd bv = detail::gather(result.map.v, boundary);
    detail::scatter(solver.solve(-(L_ib * bu)), interior, &result.map.u);
    detail::scatter(solver.solve(-(L_ib * bv)), interior, &result.map.v);
  };

  // Round 0: identity weights; the output is the harmonic map.
  solve_round(stretch_laplacian_identity(mesh, rho));
  result.harmonic = result.map;
  result.rows.push_back(make_row(mesh, result.map, rho, 0, 'F'));

  for (int k = 1; k <= cfg.fpm_iters; ++k) {
    solve_round(stretch_laplacian(mesh, result.map, rho).L);
    result.rows.push_back(make_row(mesh, result.map, rho, k, 'F'));
  }
  return result;
}

Preconditioner::Preconditioner(const TriMesh& mesh, const ParamMap& f0,
                               const AreaMeasure& rho,
                               const FreeLayout& layout)
    : layout_(&layout) {
  const SparseMat L0 = stretch_laplacian(mesh, f0, rho).L;
  const auto& seg = layout.segments();

  std::vector<int> e_int(seg.E.begin() + 1, seg.E.end() - 1);
  std::vector<int> f_int(seg.F.begin() + 1, seg.F.end() - 1);

  blocks_[0] = detail::submatrix(L0, layout.interior(), layout.interior());
  blocks_[1] = detail::submatrix(L0, e_int, e_int);
  blocks_[2] = detail::submatrix(L0, f_int, f_int);

  for (int i = 0; i < 3; ++i) factor_block(i);
}

void Preconditioner::factor_block(int i) {
  if (blocks_[i].rows() == 0) return;
  factors_[i] = std::make_unique<LLT>();
  factors_[i]->compute(blocks_[i]);
  if (factors_[i]->info() == Eigen::Success) return;

  // Not positive definite: add a small diagonal shift and retry.
  regularized_ = true;
  double max_diag = 0.0;
  for (int k = 0; k < blocks_[i].rows(); ++k) {
    max_diag = std::max(max_diag, std::abs(blocks_[i].coeff(k, k)));
  }
  SparseMat ident(blocks_[i].rows(), blocks_[i].cols());
  ident.setIdentity();
  SparseMat shifted = blocks_[i] + 1e-10 * std::max(max_diag, 1.0) * ident;
  factors_[i]->compute(shifted);
  if (factors_[i]->info() != Eigen::Success) {
    throw Error("preconditioner block factorization failed");
  }
}

Eigen::VectorXd Preconditioner::solve(const Eigen::VectorXd& g) const {
  const int ni = layout_->interior_count();
  const int ne = static_cast<int>(blocks_[1].rows());
  const int nf = static_cast<int>(blocks_[2].rows());

  Eigen::VectorXd h(g.size());
  h.segment(0, ni) = factors_[0]->solve(g.segment(0, ni));
  h.segment(ni, ni) = factors_[0]->solve(g.segment(ni, ni));
  if (ne > 0) h.segment(2 * ni, ne) = factors_[1]->solve(g.segment(2 * ni, ne));
  if (nf > 0) h.segment(2 * ni + ne, nf) = factors_[2]->solve(g.segment(2 * ni + ne, nf));
  return h;
}

uint64_t Preconditioner::fingerprint() const {
  uint64_t hash = 1469598103934665603ull;  // FNV-1a
  auto mix = [&hash](const void* data, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      hash ^= p[i];
      hash *= 1099511628211ull;
    }
  };
  for (int i = 0; i < 3; ++i) {
    if (!factors_[i]) continue;
    SparseMat Lf = factors_[i]->matrixL();
    mix(Lf.valuePtr(), sizeof(double) * Lf.nonZeros());
    const auto& perm = factors_[i]->permutationP().indices();
    mix(perm.data(), sizeof(perm[0]) * perm.size());
  }
  return hash;
}

double quadratic_step(double phi0, double dphi0, double alpha_prev,
                      double phi_prev, bool* fell_back) {
  if (!(dphi0 < 0.0)) throw Error("quadratic_step requires a descent slope");
  const double denom = 2.0 * (phi_prev - phi0 - dphi0 * alpha_prev);
  double alpha = denom > 0.0 ? -dphi0 * alpha_prev * alpha_prev / denom : -1.0;
  bool fb = false;
  if (!(denom > 0.0) || !std::isfinite(alpha) || !(alpha > 0.0) ||
      alpha > 10.0 * alpha_prev) {
    alpha = 0.5 * alpha_prev;
    fb = true;
  }
  if (fell_back) *fell_back = fb;
  return alpha;
}

SolveResult pcg_minimize(const TriMesh& mesh, const BoundarySegments& segments,
                         const SolverConfig& cfg, const AreaMeasure& rho) {
  cfg.validate();
  FreeLayout layout(mesh, segments);

  FixedPointResult fpr = fixed_point_init(mesh, segments, cfg, rho);

  SolveResult result;
  result.harmonic = fpr.harmonic;
  result.harmonic_stats = ratio_statistics(mesh, fpr.harmonic);
  result.trajectory = std::move(fpr.rows);

  Eigen::VectorXd x = layout.restrict(fpr.map);
  ParamMap f = layout.expand(x);

  Preconditioner M(mesh, f, rho, layout);
  result.preconditioner_regularized = M.regularized();
  result.precond_fingerprint_initial = M.fingerprint();

  Eigen::VectorXd g = stretch_gradient(mesh, f, rho, layout);
  Eigen::VectorXd h = M.solve(g);
  double gh = g.dot(h);
  Eigen::VectorXd p = -h;

  double energy = stretch_energy(mesh, f, rho);
  double alpha_prev = cfg.alpha0;
  const int iter_base = static_cast<int>(result.trajectory.size());

  auto eval = [&](double a) {
    return stretch_energy(mesh, layout.expand(x + a * p), rho);
  };

  for (int k = 0; k < cfg.max_iters; ++k) {
    const double gnorm = std::sqrt(std::max(gh, 0.0));
    if (gnorm < cfg.grad_tol) {
      result.stopped_on_gradient = true;
      break;
    }

    double dphi0 = g.dot(p);
    if (dphi0 >= 0.0) {
      p = -h;  // restart on a non-descent direction
      dphi0 = -gh;
      if (dphi0 >= 0.0) {
        result.stopped_on_gradient = true;
        break;
      }
    }

    // Quadratic interpolation seeded with the previous accepted step.
    double alpha_trial = alpha_prev;
    double phi_trial = eval(alpha_trial);
    if (!std::isfinite(phi_trial)) {
      result.aborted_nonfinite = true;
      break;
    }
    double alpha = quadratic_step(energy, dphi0, alpha_trial, phi_trial);
    double phi = eval(alpha);
    bool armijo = phi <= energy + cfg.wolfe_c1 * alpha * dphi0;
    for (int r = 0; r < cfg.reinterp_max && !armijo; ++r) {
      alpha_trial = alpha;
      phi_trial = phi;
      alpha = quadratic_step(energy, dphi0, alpha_trial, phi_trial);
      phi = eval(alpha);
      armijo = phi <= energy + cfg.wolfe_c1 * alpha * dphi0;
    }
    if (!armijo) {
      alpha *= 0.5;  // accept anyway, flagged
      phi = eval(alpha);
      ++result.linesearch_failures;
    }
    if (!std::isfinite(phi)) {
      result.aborted_nonfinite = true;
      break;
    }

    x += alpha * p;
    f = layout.expand(x);

    Eigen::VectorXd g_next = stretch_gradient(mesh, f, rho, layout);
    Eigen::VectorXd h_next = M.solve(g_next);
    const double gh_next = g_next.dot(h_next);
    const bool wolfe2 = std::abs(g_next.dot(p)) <= cfg.wolfe_c2 * std::abs(dphi0);

    const double beta = gh > 0.0 ? gh_next / gh : 0.0;
    p = -h_next + beta * p;
    g = std::move(g_next);
    h = std::move(h_next);
    gh = gh_next;
    alpha_prev = alpha;
    result.cg_iterations = k + 1;

    result.trajectory.push_back(make_row(mesh, f, rho, iter_base + k, 'C',
                                         alpha, armijo ? 1 : 0,
                                         wolfe2 ? 1 : 0));

    const double deficit = energy - phi;
    energy = phi;
    if (deficit < cfg.energy_tol) {
      result.stopped_on_energy = true;
      break;
    }
  }

  result.precond_fingerprint_final = M.fingerprint();
  result.map = f;
  result.final_stats = ratio_statistics(mesh, f);
  return result;
}

}  // namespace sqm
