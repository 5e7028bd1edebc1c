#pragma once

// Shared helpers and independent oracles for the test suites. Everything in
// here is deliberately written from scratch against the definitions, not by
// calling the library code it checks.

#include "squaremap/energy.hpp"
#include "squaremap/tri_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

namespace test_support {

using sqm::Face;
using sqm::ParamMap;
using sqm::TriMesh;
using sqm::Vec2;
using sqm::Vec3;

/// O(n^2) Dijkstra over the mesh edge graph, independent of the library's
/// implementation. Returns the cost from a to b.
inline double dijkstra_cost(const TriMesh& mesh, int a, int b) {
  const int n = mesh.vertex_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<bool> done(n, false);
  dist[a] = 0.0;
  for (int round = 0; round < n; ++round) {
    int u = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int v = 0; v < n; ++v) {
      if (!done[v] && dist[v] < best) {
        best = dist[v];
        u = v;
      }
    }
    if (u < 0) break;
    done[u] = true;
    for (int v : mesh.vertex_neighbors(u)) {
      const double nd = dist[u] + (mesh.vertex(u) - mesh.vertex(v)).norm();
      if (nd < dist[v]) dist[v] = nd;
    }
  }
  return dist[b];
}

/// Central finite difference of the reduced stretch energy.
inline double fd_gradient_entry(const TriMesh& mesh,
                                const sqm::FreeLayout& layout,
                                const sqm::AreaMeasure& rho,
                                const Eigen::VectorXd& x, int coord,
                                double step = 1e-6) {
  Eigen::VectorXd xp = x, xm = x;
  xp[coord] += step;
  xm[coord] -= step;
  const double ep = sqm::stretch_energy(mesh, layout.expand(xp), rho);
  const double em = sqm::stretch_energy(mesh, layout.expand(xm), rho);
  return (ep - em) / (2.0 * step);
}

/// Strictly-inside test against the convex hull of a 2D point set
/// (Andrew monotone chain, then a signed test per hull edge with slack).
inline bool in_convex_hull(const Vec2& p, std::vector<Vec2> pts, double eps) {
  if (pts.size() < 3) return false;
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) -
           (a.y() - o.y()) * (b.x() - o.x());
  };
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);  // last point repeats the first
  if (hull.size() < 3) return false;
  for (size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < eps) return false;  // on or outside this hull edge
  }
  return true;
}

/// Closest distance from a point to a 3D triangle (Ericson, Real-Time
/// Collision Detection 5.1.5).
inline double point_triangle_distance(const Vec3& p, const Vec3& a,
                                      const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return (p - a).norm();
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }
  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom, w = vc * denom;
  return (p - (a + ab * v + ac * w)).norm();
}

/// Uniform-grid accelerator for point-to-mesh distance queries.
class MeshDistance {
 public:
  explicit MeshDistance(const TriMesh& mesh) : mesh_(&mesh) {
    lo_ = Vec3::Constant(std::numeric_limits<double>::max());
    hi_ = Vec3::Constant(std::numeric_limits<double>::lowest());
    for (const Vec3& v : mesh.vertices()) {
      lo_ = lo_.cwiseMin(v);
      hi_ = hi_.cwiseMax(v);
    }
    const double target = std::cbrt(static_cast<double>(mesh.face_count()));
    cells_ = std::max(2, std::min(64, static_cast<int>(target)));
    cell_size_ = (hi_ - lo_).maxCoeff() / cells_;
    if (!(cell_size_ > 0)) cell_size_ = 1.0;
    bins_.resize(static_cast<size_t>(cells_) * cells_ * cells_);
    for (int t = 0; t < mesh.face_count(); ++t) {
      const Face& fc = mesh.face(t);
      Vec3 tlo = mesh.vertex(fc[0]).cwiseMin(mesh.vertex(fc[1])).cwiseMin(
          mesh.vertex(fc[2]));
      Vec3 thi = mesh.vertex(fc[0]).cwiseMax(mesh.vertex(fc[1])).cwiseMax(
          mesh.vertex(fc[2]));
      int c0[3], c1[3];
      cell_of(tlo, c0);
      cell_of(thi, c1);
      for (int z = c0[2]; z <= c1[2]; ++z)
        for (int y = c0[1]; y <= c1[1]; ++y)
          for (int x = c0[0]; x <= c1[0]; ++x)
            bins_[index(x, y, z)].push_back(t);
    }
  }

  double distance(const Vec3& p) const {
    int c[3];
    cell_of(p, c);
    double best = std::numeric_limits<double>::max();
    for (int ring = 0; ring < cells_; ++ring) {
      bool any = false;
      for (int z = std::max(0, c[2] - ring); z <= std::min(cells_ - 1, c[2] + ring); ++z) {
        for (int y = std::max(0, c[1] - ring); y <= std::min(cells_ - 1, c[1] + ring); ++y) {
          for (int x = std::max(0, c[0] - ring); x <= std::min(cells_ - 1, c[0] + ring); ++x) {
            if (std::max({std::abs(x - c[0]), std::abs(y - c[1]),
                          std::abs(z - c[2])}) != ring) {
              continue;  // shell only
            }
            any = true;
            for (int t : bins_[index(x, y, z)]) {
              const Face& fc = mesh_->face(t);
              best = std::min(best, point_triangle_distance(
                                        p, mesh_->vertex(fc[0]),
                                        mesh_->vertex(fc[1]),
                                        mesh_->vertex(fc[2])));
            }
          }
        }
      }
      // Any point in a farther shell is at least (ring) cells away.
      if (best < static_cast<double>(ring) * cell_size_) break;
      if (!any && ring > 0 && best < std::numeric_limits<double>::max()) break;
    }
    return best;
  }

 private:
  void cell_of(const Vec3& p, int* c) const {
    for (int i = 0; i < 3; ++i) {
      c[i] = std::clamp(static_cast<int>((p[i] - lo_[i]) / cell_size_), 0,
                        cells_ - 1);
    }
  }
  size_t index(int x, int y, int z) const {
    return (static_cast<size_t>(z) * cells_ + y) * cells_ + x;
  }

  const TriMesh* mesh_;
  Vec3 lo_, hi_;
  int cells_ = 2;
  double cell_size_ = 1.0;
  std::vector<std::vector<int>> bins_;
};

inline double mean_distance_to(const TriMesh& from, const MeshDistance& to) {
  double sum = 0.0;
  for (const Vec3& v : from.vertices()) sum += to.distance(v);
  return sum / from.vertex_count();
}

inline double symmetric_mean_surface_distance(const TriMesh& a,
                                              const TriMesh& b) {
  MeshDistance da(a), db(b);
  return 0.5 * (mean_distance_to(a, db) + mean_distance_to(b, da));
}

inline ParamMap random_map(int n, std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  ParamMap f;
  f.u.resize(n);
  f.v.resize(n);
  for (int i = 0; i < n; ++i) {
    f.u[i] = uni(rng);
    f.v[i] = uni(rng);
  }
  return f;
}

}  // namespace test_support
