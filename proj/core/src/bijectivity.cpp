#include "squaremap/bijectivity.hpp"

#include "sparse_util.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace sqm {

FoldReport count_folded(const TriMesh& mesh, const ParamMap& f) {
  FoldReport report;
  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    const Vec2 a = f.at(fc[0]), b = f.at(fc[1]), c = f.at(fc[2]);
    const Vec2 e1 = b - a, e2 = c - a;
    const double signed_area = 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
    if (signed_area <= 1e-15) {
      report.faces.push_back(t);
    }
  }
  report.count = static_cast<int>(report.faces.size());
  return report;
}

MeanValueLaplacian mean_value_laplacian(const TriMesh& mesh,
                                        const ParamMap& f) {
  const int n = mesh.vertex_count();
  MeanValueLaplacian out;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

  constexpr double kMaxHalfAngle = M_PI / 2.0 - 1e-9;

  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    bool clamped = false;
    for (int corner = 0; corner < 3; ++corner) {
      const int i = fc[corner];
      const int j = fc[(corner + 1) % 3];
      const int k = fc[(corner + 2) % 3];
      const Vec2 ej = f.at(j) - f.at(i);
      const Vec2 ek = f.at(k) - f.at(i);
      const double lj = ej.norm(), lk = ek.norm();
      if (lj <= 1e-14 || lk <= 1e-14) {
        throw Error("coincident mapped vertices on an edge");
      }
      const double cross = ej.x() * ek.y() - ej.y() * ek.x();
      const double gamma = std::atan2(std::abs(cross), ej.dot(ek));
      double half = 0.5 * gamma;
      if (half >= kMaxHalfAngle) {
        half = kMaxHalfAngle;
        clamped = true;
      }
      if (half <= 0.0) {
        half = std::numeric_limits<double>::min();
        clamped = true;
      }
      const double w = std::tan(half);
      // Row i gets contributions on both edges at this corner.
      const double wj = w / lj, wk = w / lk;
      trip.emplace_back(i, j, -wj);
      trip.emplace_back(i, k, -wk);
      diag[i] += wj + wk;
    }
    if (clamped) out.clamped_faces.push_back(t);
  }
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);

  out.L.resize(n, n);
  out.L.setFromTriplets(trip.begin(), trip.end());
  return out;
}

ParamMap correct_overlaps(const TriMesh& mesh, const ParamMap& f,
                          const BoundarySegments& segments) {
  const int n = mesh.vertex_count();
  std::vector<bool> on_boundary(n, false);
  for (const auto* seg : {&segments.E, &segments.F, &segments.G, &segments.H}) {
    for (int v : *seg) on_boundary[v] = true;
  }
  std::vector<int> interior, boundary;
  for (int v = 0; v < n; ++v) {
    (on_boundary[v] ? boundary : interior).push_back(v);
  }

  MeanValueLaplacian mv = mean_value_laplacian(mesh, f);

  // Row-normalize by the diagonal; each equation scales uniformly, so the
  // solution is unchanged but the system is better conditioned.
  Eigen::VectorXd inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = mv.L.coeff(i, i);
    if (!(d > 0.0)) throw Error("mean-value row with nonpositive diagonal");
    inv_diag[i] = 1.0 / d;
  }
  SparseMat Ln = inv_diag.asDiagonal() * mv.L;

  SparseMat L_ii = detail::submatrix(Ln, interior, interior);
  SparseMat L_ib = detail::submatrix(Ln, interior, boundary);

  Eigen::SparseLU<SparseMat> lu;
  lu.compute(L_ii);
  if (lu.info() != Eigen::Success) {
    throw Error("mean-value system is singular");
  }

  ParamMap out = f;
  const Eigen::VectorXd bu = detail::gather(f.u, boundary);
  const Eigen::VectorXd bv = detail::gather(f.v, boundary);
  const Eigen::VectorXd iu = lu.solve(-(L_ib * bu));
  const Eigen::VectorXd iv = lu.solve(-(L_ib * bv));
  detail::scatter(iu, interior, &out.u);
  detail::scatter(iv, interior, &out.v);
  return out;
}

}  // namespace sqm
