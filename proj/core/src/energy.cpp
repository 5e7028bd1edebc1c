#include "squaremap/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sqm {

namespace {

constexpr double kAreaClamp = 1e-14;
constexpr double kCotClamp = 1e8;

double image_face_area(const ParamMap& f, const Face& fc) {
  const Vec2 a = f.at(fc[0]), b = f.at(fc[1]), c = f.at(fc[2]);
  const Vec2 e1 = b - a, e2 = c - a;
  return 0.5 * std::abs(e1.x() * e2.y() - e1.y() * e2.x());
}

}  // namespace

AreaMeasure AreaMeasure::face_areas(const TriMesh& mesh) {
  AreaMeasure am;
  am.rho.resize(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) am.rho[f] = mesh.face_area(f);
  return am;
}

AreaMeasure AreaMeasure::constant(const TriMesh& mesh) {
  AreaMeasure am;
  am.rho = Eigen::VectorXd::Constant(mesh.face_count(),
                                     mesh.total_area() / mesh.face_count());
  return am;
}

StretchLaplacian stretch_laplacian(const TriMesh& mesh, const ParamMap& f,
                                   const AreaMeasure& rho) {
  const int n = mesh.vertex_count();
  StretchLaplacian out;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.face_count() * 9);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    const Vec2 p[3] = {f.at(fc[0]), f.at(fc[1]), f.at(fc[2])};
    double area = image_face_area(f, fc);
    bool clamped = false;
    if (area < kAreaClamp) {
      area = kAreaClamp;
      clamped = true;
    }
    const double w = area / rho.rho[t];
    for (int corner = 0; corner < 3; ++corner) {
      const int i = fc[(corner + 1) % 3], j = fc[(corner + 2) % 3];
      const Vec2 e1 = p[(corner + 1) % 3] - p[corner];
      const Vec2 e2 = p[(corner + 2) % 3] - p[corner];
      double cot = e1.dot(e2) / (2.0 * area);
      if (std::abs(cot) > kCotClamp) {
        cot = std::copysign(kCotClamp, cot);
        clamped = true;
      }
      const double entry = -0.5 * cot * w;
      trip.emplace_back(i, j, entry);
      trip.emplace_back(j, i, entry);
      diag[i] -= entry;
      diag[j] -= entry;
    }
    if (clamped) out.clamped_faces.push_back(t);
  }
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);

  out.L.resize(n, n);
  out.L.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMat stretch_laplacian_identity(const TriMesh& mesh,
                                     const AreaMeasure& rho) {
  const int n = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.face_count() * 9);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);

  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    const Vec3 p[3] = {mesh.vertex(fc[0]), mesh.vertex(fc[1]),
                       mesh.vertex(fc[2])};
    const double area = mesh.face_area(t);
    const double w = area / rho.rho[t];
    for (int corner = 0; corner < 3; ++corner) {
      const int i = fc[(corner + 1) % 3], j = fc[(corner + 2) % 3];
      const Vec3 e1 = p[(corner + 1) % 3] - p[corner];
      const Vec3 e2 = p[(corner + 2) % 3] - p[corner];
      const double cot = e1.dot(e2) / (2.0 * area);
      const double entry = -0.5 * cot * w;
      trip.emplace_back(i, j, entry);
      trip.emplace_back(j, i, entry);
      diag[i] -= entry;
      diag[j] -= entry;
    }
  }
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);

  SparseMat L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

double stretch_energy(const TriMesh& mesh, const ParamMap& f,
                      const AreaMeasure& rho) {
  double sum = 0.0;
  for (int t = 0; t < mesh.face_count(); ++t) {
    const double a = image_face_area(f, mesh.face(t));
    sum += a * a / rho.rho[t];
  }
  return sum;
}

double image_area(const TriMesh& mesh, const ParamMap& f) {
  double sum = 0.0;
  for (int t = 0; t < mesh.face_count(); ++t) {
    sum += image_face_area(f, mesh.face(t));
  }
  return sum;
}

double authalic_energy(const TriMesh& mesh, const ParamMap& f) {
  const double area = image_area(mesh, f);
  if (!(area > 0.0)) throw Error("zero image area");
  const AreaMeasure rho = AreaMeasure::face_areas(mesh);
  return mesh.total_area() / area * stretch_energy(mesh, f, rho) - area;
}

RatioStats ratio_statistics(const TriMesh& mesh, const ParamMap& f) {
  const int m = mesh.face_count();
  const double total = mesh.total_area();
  const double area = image_area(mesh, f);

  RatioStats st;
  st.min_source_area = std::numeric_limits<double>::max();

  Eigen::VectorXd r(m);
  for (int t = 0; t < m; ++t) {
    const double source = mesh.face_area(t);
    r[t] = image_face_area(f, mesh.face(t)) / source;
    st.min_source_area = std::min(st.min_source_area, source);
  }

  st.weighted_mean = area / total;
  double wvar = 0.0;
  for (int t = 0; t < m; ++t) {
    const double d = r[t] - st.weighted_mean;
    wvar += mesh.face_area(t) / total * d * d;
  }
  st.weighted_variance = wvar;

  st.unweighted_mean = r.mean();
  st.unweighted_variance = (r.array() - st.unweighted_mean).square().mean();

  // R = r / (A / |M|): ratios normalized by the global scale.
  const double scale = area / total;
  st.r_area_mean = st.unweighted_mean / scale;
  st.r_area_sd = std::sqrt(st.unweighted_variance) / scale;

  const double e_a = total / area * stretch_energy(mesh, f,
                                                   AreaMeasure::face_areas(mesh)) -
                     area;
  st.variance_bound = area * e_a / (m * total * st.min_source_area);
  return st;
}

FreeLayout::FreeLayout(const TriMesh& mesh, const BoundarySegments& segments)
    : segments_(segments), n_(mesh.vertex_count()) {
  const int n = n_;
  std::vector<bool> on_boundary(n, false);
  for (const auto* seg : {&segments_.E, &segments_.F, &segments_.G, &segments_.H}) {
    for (int v : *seg) {
      if (v < 0 || v >= n) throw Error("segment index out of range");
      on_boundary[v] = true;
    }
  }
  for (int v = 0; v < n; ++v) {
    (on_boundary[v] ? boundary_ : interior_).push_back(v);
  }

  const int ni = static_cast<int>(interior_.size());
  const int ne = static_cast<int>(segments_.E.size()) - 2;
  const int nf = static_cast<int>(segments_.F.size()) - 2;
  if (ne < 0 || nf < 0) throw Error("boundary segment too short");
  nfree_ = 2 * ni + ne + nf;

  // Affine expansion [u; v] = P x + c. Row r < n is u_r, row n + r is v_r.
  std::vector<Eigen::Triplet<double>> trip;
  c_ = Eigen::VectorXd::Zero(2 * n);

  for (int t = 0; t < ni; ++t) {
    trip.emplace_back(interior_[t], t, 1.0);
    trip.emplace_back(n_ + interior_[t], ni + t, 1.0);
  }

  const bool genus0 = segments_.genus == 0;

  // E carries u values from 0 to 1 (v = 0); the identified segment mirrors
  // them into H's v (genus 0) or G's u (genus 1).
  for (size_t t = 0; t < segments_.E.size(); ++t) {
    const int e = segments_.E[t];
    const int partner = genus0 ? segments_.H[t] : segments_.G[t];
    c_[n_ + e] = 0.0;  // v on the bottom edge
    if (genus0) {
      c_[partner] = 0.0;       // u on the left edge
    } else {
      c_[n_ + partner] = 1.0;  // v on the top edge
    }
    const bool corner = t == 0 || t + 1 == segments_.E.size();
    const double value = t == 0 ? 0.0 : 1.0;
    if (corner) {
      c_[e] = value;
      if (genus0) c_[n_ + partner] = value;
      else c_[partner] = value;
    } else {
      const int col = e_offset() + static_cast<int>(t) - 1;
      trip.emplace_back(e, col, 1.0);
      if (genus0) trip.emplace_back(n_ + partner, col, 1.0);
      else trip.emplace_back(partner, col, 1.0);
    }
  }

  // F carries v values from 0 to 1 (u = 1); mirrored into G's u (genus 0)
  // or H's v (genus 1).
  for (size_t t = 0; t < segments_.F.size(); ++t) {
    const int ff = segments_.F[t];
    const int partner = genus0 ? segments_.G[t] : segments_.H[t];
    c_[ff] = 1.0;  // u on the right edge
    if (genus0) {
      c_[n_ + partner] = 1.0;  // v on the top edge
    } else {
      c_[partner] = 0.0;       // u on the left edge
    }
    const bool corner = t == 0 || t + 1 == segments_.F.size();
    const double value = t == 0 ? 0.0 : 1.0;
    if (corner) {
      c_[n_ + ff] = value;
      if (genus0) c_[partner] = value;
      else c_[n_ + partner] = value;
    } else {
      const int col = f_offset() + static_cast<int>(t) - 1;
      trip.emplace_back(n_ + ff, col, 1.0);
      if (genus0) trip.emplace_back(partner, col, 1.0);
      else trip.emplace_back(n_ + partner, col, 1.0);
    }
  }

  P_.resize(2 * n, nfree_);
  P_.setFromTriplets(trip.begin(), trip.end());
}

ParamMap FreeLayout::expand(const Eigen::VectorXd& x) const {
  Eigen::VectorXd full = P_ * x + c_;
  ParamMap f;
  f.u = full.head(n_);
  f.v = full.tail(n_);
  return f;
}

Eigen::VectorXd FreeLayout::restrict(const ParamMap& f) const {
  Eigen::VectorXd x(nfree_);
  const int ni = static_cast<int>(interior_.size());
  for (int t = 0; t < ni; ++t) {
    x[t] = f.u[interior_[t]];
    x[ni + t] = f.v[interior_[t]];
  }
  for (size_t t = 1; t + 1 < segments_.E.size(); ++t) {
    x[e_offset() + static_cast<int>(t) - 1] = f.u[segments_.E[t]];
  }
  for (size_t t = 1; t + 1 < segments_.F.size(); ++t) {
    x[f_offset() + static_cast<int>(t) - 1] = f.v[segments_.F[t]];
  }
  return x;
}

Eigen::VectorXd FreeLayout::reduce_gradient(const Eigen::VectorXd& gu,
                                            const Eigen::VectorXd& gv) const {
  Eigen::VectorXd full(2 * n_);
  full << gu, gv;
  return P_.transpose() * full;
}

void FreeLayout::reduce_quadratic(const SparseMat& L, SparseMat* K,
                                  Eigen::VectorXd* rhs) const {
  const SparseMat Pu = P_.topRows(n_);
  const SparseMat Pv = P_.bottomRows(n_);
  const Eigen::VectorXd cu = c_.head(n_);
  const Eigen::VectorXd cv = c_.tail(n_);
  if (K) {
    *K = SparseMat(Pu.transpose() * L * Pu) + SparseMat(Pv.transpose() * L * Pv);
  }
  if (rhs) {
    *rhs = -(Pu.transpose() * (L * cu) + Pv.transpose() * (L * cv));
  }
}

void FreeLayout::check_constraints(const ParamMap& f, double tol) const {
  ParamMap rebuilt = expand(restrict(f));
  const double du = (rebuilt.u - f.u).cwiseAbs().maxCoeff();
  const double dv = (rebuilt.v - f.v).cwiseAbs().maxCoeff();
  if (du > tol || dv > tol) {
    throw Error("map violates square boundary constraints");
  }
}

Eigen::VectorXd stretch_gradient(const TriMesh& mesh, const ParamMap& f,
                                 const AreaMeasure& rho,
                                 const FreeLayout& layout,
                                 std::vector<int>* clamped_faces) {
  layout.check_constraints(f);
  StretchLaplacian sl = stretch_laplacian(mesh, f, rho);
  if (clamped_faces) *clamped_faces = sl.clamped_faces;
  const Eigen::VectorXd gu = 2.0 * (sl.L * f.u);
  const Eigen::VectorXd gv = 2.0 * (sl.L * f.v);
  return layout.reduce_gradient(gu, gv);
}

}  // namespace sqm
