#include "squaremap/generators.hpp"

#include <cmath>
#include <map>

namespace sqm {

TriMesh make_icosahedron(double edge) {
  // Canonical coordinates (0, +-1, +-phi) have edge length 2.
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double s = 0.5 * edge;
  std::vector<Vec3> v = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& p : v) p *= s;
  std::vector<Face> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(int subdiv, double radius) {
  TriMesh ico = make_icosahedron(2.0);
  std::vector<Vec3> verts = ico.vertices();
  std::vector<Face> faces = ico.faces();

  for (int level = 0; level < subdiv; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      int idx = static_cast<int>(verts.size());
      verts.push_back(0.5 * (verts[a] + verts[b]));
      midpoint[key] = idx;
      return idx;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  for (Vec3& p : verts) p = radius * p.normalized();
  return TriMesh(std::move(verts), std::move(faces));
}

TriMesh make_torus(int nu, int nv, double major_radius, double minor_radius) {
  if (nu < 3 || nv < 3) throw Error("torus grid needs nu, nv >= 3");
  std::vector<Vec3> verts(static_cast<size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    const double a = 2.0 * M_PI * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double b = 2.0 * M_PI * j / nv;
      const double rr = major_radius + minor_radius * std::cos(b);
      verts[static_cast<size_t>(i) * nv + j] =
          Vec3(rr * std::cos(a), rr * std::sin(a), minor_radius * std::sin(b));
    }
  }
  auto at = [nv](int i, int j) { return i * nv + j; };
  std::vector<Face> faces;
  faces.reserve(2 * static_cast<size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i) {
    int i1 = (i + 1) % nu;
    for (int j = 0; j < nv; ++j) {
      int j1 = (j + 1) % nv;
      faces.push_back({at(i, j), at(i1, j), at(i1, j1)});
      faces.push_back({at(i, j), at(i1, j1), at(i, j1)});
    }
  }
  return TriMesh(std::move(verts), std::move(faces));
}

std::pair<CutPath, CutPath> canonical_torus_loops(int nu, int nv) {
  CutPath tube, axial;
  tube.closed = true;
  axial.closed = true;
  for (int j = 0; j < nv; ++j) tube.vertices.push_back(j);          // i = 0
  for (int i = 0; i < nu; ++i) axial.vertices.push_back(i * nv);    // j = 0
  return {tube, axial};
}

TriMesh make_flat_grid(int k) {
  if (k < 1) throw Error("grid needs k >= 1");
  const int n = k + 1;
  std::vector<Vec3> verts(static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      verts[static_cast<size_t>(j) * n + i] =
          Vec3(static_cast<double>(i) / k, static_cast<double>(j) / k, 0.0);
    }
  }
  auto at = [n](int i, int j) { return j * n + i; };
  std::vector<Face> faces;
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < k; ++i) {
      faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
      faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
    }
  }
  return TriMesh(std::move(verts), std::move(faces));
}

BoundarySegments flat_grid_segments(int k) {
  const int n = k + 1;
  auto at = [n](int i, int j) { return j * n + i; };
  BoundarySegments seg;
  seg.genus = 0;
  for (int i = 0; i < n; ++i) seg.E.push_back(at(i, 0));
  for (int j = 0; j < n; ++j) seg.F.push_back(at(k, j));
  for (int i = 0; i < n; ++i) seg.G.push_back(at(i, k));
  for (int j = 0; j < n; ++j) seg.H.push_back(at(0, j));
  seg.corners = {at(0, 0), at(k, 0), at(k, k), at(0, k)};
  return seg;
}

}  // namespace sqm
