#include "squaremap/slicer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace sqm {

namespace {

void validate_path(const TriMesh& mesh, const CutPath& p) {
  const int k = p.length();
  if (p.closed ? k < 3 : k < 2) throw Error("cut path too short");
  std::unordered_set<int> seen;
  for (int v : p.vertices) {
    if (v < 0 || v >= mesh.vertex_count()) throw Error("path index out of range");
    if (!seen.insert(v).second) throw Error("cut path crosses itself");
  }
  for (int i = 0; i + 1 < k; ++i) {
    if (!mesh.has_edge(p.vertices[i], p.vertices[i + 1])) {
      throw Error("consecutive path vertices are not a mesh edge");
    }
  }
  if (p.closed && !mesh.has_edge(p.vertices[k - 1], p.vertices[0])) {
    throw Error("closed path is not a cycle of mesh edges");
  }
}

std::vector<int> rotate_to_front(const std::vector<int>& cycle, int value) {
  auto it = std::find(cycle.begin(), cycle.end(), value);
  if (it == cycle.end()) throw Error("value not on cycle");
  std::vector<int> out(it, cycle.end());
  out.insert(out.end(), cycle.begin(), it);
  return out;
}

// Cuts along a path (open or closed). The duplicate set covers interior
// path vertices, endpoints lying on a pre-existing boundary, every vertex
// of a closed loop, and both endpoints of a two-vertex path.
SlicedMesh cut_along(const TriMesh& mesh, const CutPath& p) {
  validate_path(mesh, p);
  const int n = mesh.vertex_count();
  const int m = mesh.face_count();
  const int k = p.length();
  const auto& pv = p.vertices;

  std::vector<int> pos(n, -1);
  for (int i = 0; i < k; ++i) pos[pv[i]] = i;

  if (!p.closed) {
    for (int i = 1; i + 1 < k; ++i) {
      if (mesh.is_boundary_vertex(pv[i])) {
        throw Error("interior path vertex lies on the boundary");
      }
    }
  }

  // Consecutive-in-path test on a directed vertex pair.
  auto path_edge_dir = [&](int u, int v) {
    int iu = pos[u], iv = pos[v];
    if (iu < 0 || iv < 0) return false;
    if (iv == iu + 1) return true;
    return p.closed && iu == k - 1 && iv == 0;
  };

  // Side of each face: 0 unassigned, 1 left, 2 right.
  std::vector<int8_t> side(m, 0);
  const auto& faces = mesh.faces();
  std::vector<int8_t> n_on_path(m, 0);
  for (int f = 0; f < m; ++f) {
    for (int v : faces[f]) n_on_path[f] += (pos[v] >= 0);
    if (n_on_path[f] == 3) {
      throw Error("three path vertices share one face");
    }
  }

  for (int f = 0; f < m; ++f) {
    if (n_on_path[f] < 2) continue;
    for (int e = 0; e < 3; ++e) {
      int u = faces[f][e], v = faces[f][(e + 1) % 3];
      if (path_edge_dir(u, v)) side[f] = 1;
      else if (path_edge_dir(v, u)) side[f] = 2;
    }
  }

  // Vertices to duplicate. A two-vertex path has no interior, so both
  // endpoints are duplicated like a closed loop's vertices.
  std::vector<bool> dup_set(n, false);
  if (p.closed || k == 2) {
    for (int v : pv) dup_set[v] = true;
  } else {
    for (int i = 1; i + 1 < k; ++i) dup_set[pv[i]] = true;
    if (mesh.is_boundary_vertex(pv[0])) dup_set[pv[0]] = true;
    if (mesh.is_boundary_vertex(pv[k - 1])) dup_set[pv[k - 1]] = true;
  }

  // Faces that must end up on one side: they touch a duplicated vertex.
  std::vector<int> pending;
  for (int f = 0; f < m; ++f) {
    if (side[f] != 0) continue;
    for (int v : faces[f]) {
      if (pos[v] >= 0 && dup_set[v]) {
        pending.push_back(f);
        break;
      }
    }
  }

  // Left/right vertex sets: off-path vertices of assigned faces.
  std::vector<char> in_left(n, 0), in_right(n, 0);
  auto absorb = [&](int f, std::vector<char>& set) {
    for (int v : faces[f]) {
      if (pos[v] < 0) set[v] = 1;
    }
  };
  for (int f = 0; f < m; ++f) {
    if (side[f] == 1) absorb(f, in_left);
    if (side[f] == 2) absorb(f, in_right);
  }

  // Alternating propagation: one left sweep, one right sweep per round,
  // each taking all faces reachable from the current vertex sets.
  auto sweep = [&](int8_t tag, std::vector<char>& set) {
    std::vector<int> taken;
    for (int f : pending) {
      if (side[f] != 0) continue;
      bool touch = false;
      for (int v : faces[f]) touch = touch || set[v];
      if (touch) {
        side[f] = tag;
        taken.push_back(f);
      }
    }
    for (int f : taken) absorb(f, set);
    return !taken.empty();
  };

  for (;;) {
    bool any_left = sweep(1, in_left);
    bool any_right = sweep(2, in_right);
    bool done = std::all_of(pending.begin(), pending.end(),
                            [&](int f) { return side[f] != 0; });
    if (done) break;
    if (!any_left && !any_right) {
      throw Error("slice propagation stalled (non-manifold neighborhood)");
    }
  }

  // Materialize duplicates for path vertices referenced by a right face.
  std::vector<int> dup_index(n, -1);
  std::vector<Vec3> new_vertices = mesh.vertices();
  std::vector<int> origin(n);
  for (int v = 0; v < n; ++v) origin[v] = v;
  for (int i = 0; i < k; ++i) {
    int v = pv[i];
    if (!dup_set[v]) continue;
    bool referenced = false;
    for (int f : mesh.vertex_faces(v)) referenced = referenced || side[f] == 2;
    if (!referenced) continue;
    dup_index[v] = static_cast<int>(new_vertices.size());
    new_vertices.push_back(mesh.vertex(v));
    origin.push_back(v);
  }

  std::vector<Face> new_faces = faces;
  for (int f = 0; f < m; ++f) {
    if (side[f] != 2) continue;
    for (int& v : new_faces[f]) {
      if (pos[v] >= 0 && dup_index[v] >= 0) v = dup_index[v];
    }
  }

  SlicedMesh out{TriMesh(std::move(new_vertices), std::move(new_faces)),
                 std::move(origin), std::nullopt, {}, {}, {}, -1};
  return out;
}

}  // namespace

std::pair<int, int> principal_axis_extremes(const TriMesh& mesh) {
  const int n = mesh.vertex_count();
  if (n < 2) throw Error("mesh too small for principal axis");

  Vec3 mean = Vec3::Zero();
  for (const Vec3& v : mesh.vertices()) mean += v;
  mean /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& v : mesh.vertices()) {
    Vec3 d = v - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Vec3 axis = eig.eigenvectors().col(2);  // largest eigenvalue

  // Deterministic sign: largest-magnitude component positive.
  int imax = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(axis[i]) > std::abs(axis[imax])) imax = i;
  }
  if (axis[imax] < 0) axis = -axis;

  int vmin = 0, vmax = 0;
  double pmin = axis.dot(mesh.vertex(0)), pmax = pmin;
  for (int v = 1; v < n; ++v) {
    double proj = axis.dot(mesh.vertex(v));
    if (proj < pmin) { pmin = proj; vmin = v; }
    if (proj > pmax) { pmax = proj; vmax = v; }
  }
  if (vmin == vmax) throw Error("degenerate vertex distribution");
  return {vmin, vmax};
}

CutPath shortest_path(const TriMesh& mesh, int a, int b) {
  const int n = mesh.vertex_count();
  if (a == b) throw Error("path endpoints coincide");
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> pred(n, -1);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
  dist[a] = 0.0;
  heap.push({0.0, a});
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    if (u == b) break;
    for (int v : mesh.vertex_neighbors(u)) {
      double nd = d + (mesh.vertex(u) - mesh.vertex(v)).norm();
      if (nd < dist[v]) {
        dist[v] = nd;
        pred[v] = u;
        heap.push({nd, v});
      } else if (nd == dist[v] && u < pred[v]) {
        pred[v] = u;
      }
    }
  }
  if (!std::isfinite(dist[b])) throw Error("mesh is disconnected");

  CutPath path;
  for (int v = b; v != -1; v = pred[v]) path.vertices.push_back(v);
  std::reverse(path.vertices.begin(), path.vertices.end());
  return path;
}

SlicedMesh slice_along_path(const TriMesh& mesh, const CutPath& path) {
  if (path.closed) throw Error("slice_along_path expects an open path");
  SlicedMesh s = cut_along(mesh, path);
  s.cut_path = path;
  return s;
}

SlicedMesh slice_along_loop(const TriMesh& mesh, const CutPath& loop) {
  if (!loop.closed) throw Error("slice_along_loop expects a closed loop");
  return cut_along(mesh, loop);
}

SlicedMesh slice_genus_one(const TriMesh& mesh, const CutPath& loop_a_in,
                           const CutPath& loop_b_in) {
  if (!loop_a_in.closed || !loop_b_in.closed) {
    throw Error("genus-one cut loops must be closed");
  }

  // Base vertex: the single intersection of the two loops.
  std::unordered_set<int> a_set(loop_a_in.vertices.begin(),
                                loop_a_in.vertices.end());
  std::vector<int> shared;
  for (int v : loop_b_in.vertices) {
    if (a_set.count(v)) shared.push_back(v);
  }
  if (shared.size() != 1) {
    throw Error("cut loops must share exactly one vertex, found " +
                std::to_string(shared.size()));
  }
  const int base = shared[0];

  CutPath loop_a{rotate_to_front(loop_a_in.vertices, base), true};
  CutPath loop_b{rotate_to_front(loop_b_in.vertices, base), true};

  SlicedMesh first = slice_along_loop(mesh, loop_a);

  int base_dup = -1;
  for (int v = mesh.vertex_count(); v < first.mesh.vertex_count(); ++v) {
    if (first.origin[v] == base) base_dup = v;
  }
  if (base_dup < 0) throw Error("base vertex was not duplicated by first cut");

  // Re-express loop_b as an open path between the two copies of the base
  // vertex in the cut mesh. Each end attaches to whichever copy kept the
  // adjacent edge; a transversal crossing attaches them to different copies.
  const auto& bv = loop_b.vertices;
  const int t = static_cast<int>(bv.size()) - 1;
  int start = first.mesh.has_edge(base, bv[1]) ? base : base_dup;
  if (!first.mesh.has_edge(start, bv[1])) throw Error("loop_b broken by first cut");
  int finish = first.mesh.has_edge(bv[t], base) ? base : base_dup;
  if (!first.mesh.has_edge(bv[t], finish)) throw Error("loop_b broken by first cut");
  if (start == finish) {
    throw Error("cut loops do not cross transversally at the base vertex");
  }

  CutPath across;
  across.vertices.push_back(start);
  for (int i = 1; i <= t; ++i) across.vertices.push_back(bv[i]);
  across.vertices.push_back(finish);

  SlicedMesh second = slice_along_path(first.mesh, across);

  // Compose vertex provenance through both cuts.
  std::vector<int> origin(second.mesh.vertex_count());
  for (int v = 0; v < second.mesh.vertex_count(); ++v) {
    origin[v] = first.origin[second.origin[v]];
  }

  SlicedMesh out{std::move(second.mesh), std::move(origin), std::nullopt,
                 {}, loop_a, loop_b, base};

  if (out.mesh.euler_characteristic() != 1) {
    throw Error("genus-one slicing did not produce a disk");
  }
  return out;
}

BoundarySegments assign_corners_and_segments(SlicedMesh& s, int genus) {
  auto loops = s.mesh.boundary_loops();
  if (loops.size() != 1) {
    throw Error("sliced mesh must have exactly one boundary loop, found " +
                std::to_string(loops.size()));
  }
  const std::vector<int>& raw = loops[0].vertices;
  const int len = static_cast<int>(raw.size());

  BoundarySegments seg;
  seg.genus = genus;

  auto origin_of = [&](int v) { return s.origin[v]; };

  std::vector<int> loop;
  int q1 = -1, q2 = -1, q3 = -1;

  if (genus == 0) {
    const auto& path = s.cut_path.vertices;
    const int k = static_cast<int>(path.size());
    if (k < 3) throw Error("genus-0 corner assignment needs a path of >= 3 vertices");

    const int vm = path.front(), vM = path.back();

    // Corner split vertex: nearest to half the cumulative arc length,
    // ties toward the lower arc length.
    std::vector<double> arc(k, 0.0);
    for (int i = 1; i < k; ++i) {
      arc[i] = arc[i - 1] +
               (s.mesh.vertex(path[i]) - s.mesh.vertex(path[i - 1])).norm();
    }
    const double half = 0.5 * arc[k - 1];
    int tw = 1;
    for (int i = 2; i + 1 < k; ++i) {
      if (std::abs(arc[i] - half) < std::abs(arc[tw] - half)) tw = i;
    }
    const int w = path[tw];

    loop = rotate_to_front(raw, vm);
    int posK = -1;
    for (int i = 0; i < len; ++i) {
      if (loop[i] == vM) posK = i;
    }
    if (posK < 0) throw Error("path endpoint missing from boundary loop");

    for (int i = 1; i < posK; ++i) {
      if (origin_of(loop[i]) == w) {
        if (q1 >= 0) throw Error("corner vertex appears twice on one side");
        q1 = i;
      }
    }
    for (int i = posK + 1; i < len; ++i) {
      if (origin_of(loop[i]) == w) {
        if (q3 >= 0) throw Error("corner vertex appears twice on one side");
        q3 = i;
      }
    }
    if (q1 < 0 || q3 < 0) throw Error("corner copies missing from boundary loop");
    q2 = posK;
  } else if (genus == 1) {
    if (s.base_vertex < 0) throw Error("missing genus-one cut metadata");
    const auto& la = s.loop_a.vertices;

    std::vector<int> corner_pos;
    for (int i = 0; i < len; ++i) {
      if (origin_of(raw[i]) == s.base_vertex) corner_pos.push_back(i);
    }
    if (corner_pos.size() != 4) {
      throw Error("expected 4 copies of the base vertex on the boundary, found " +
                  std::to_string(corner_pos.size()));
    }

    // Start at the corner whose outgoing segment follows loop_a forward.
    int start_pos = -1;
    for (int c : corner_pos) {
      if (origin_of(raw[(c + 1) % len]) == la[1]) start_pos = c;
    }
    if (start_pos < 0) throw Error("no boundary segment follows the first loop");

    std::vector<int> rot(raw.begin() + start_pos, raw.end());
    rot.insert(rot.end(), raw.begin(), raw.begin() + start_pos);
    loop = std::move(rot);
    std::vector<int> qs;
    for (int i = 1; i < len; ++i) {
      if (origin_of(loop[i]) == s.base_vertex) qs.push_back(i);
    }
    q1 = qs[0]; q2 = qs[1]; q3 = qs[2];
  } else {
    throw Error("genus must be 0 or 1");
  }

  seg.corners = {loop[0], loop[q1], loop[q2], loop[q3]};
  seg.E.assign(loop.begin(), loop.begin() + q1 + 1);
  seg.F.assign(loop.begin() + q1, loop.begin() + q2 + 1);
  seg.G.assign(loop.begin() + q2, loop.begin() + q3 + 1);
  std::reverse(seg.G.begin(), seg.G.end());
  seg.H.push_back(loop[0]);
  for (int i = len - 1; i >= q3; --i) seg.H.push_back(loop[i]);

  // Identified segments must align entrywise through the cut origins.
  const auto& first = genus == 0 ? seg.H : seg.G;
  const auto& second = genus == 0 ? seg.G : seg.H;
  if (seg.E.size() != first.size() || seg.F.size() != second.size()) {
    throw Error("boundary segment lengths do not pair up");
  }
  for (size_t i = 0; i < seg.E.size(); ++i) {
    if (origin_of(seg.E[i]) != origin_of(first[i])) {
      throw Error("boundary loop inconsistent with origin pairing (E)");
    }
  }
  for (size_t i = 0; i < seg.F.size(); ++i) {
    if (origin_of(seg.F[i]) != origin_of(second[i])) {
      throw Error("boundary loop inconsistent with origin pairing (F)");
    }
  }

  s.segments = seg;
  return seg;
}

SlicedMesh slice_for_square(const TriMesh& mesh, int genus,
                            const CutPath* loop_a, const CutPath* loop_b) {
  auto finish = [genus](SlicedMesh s) {
    if (s.mesh.euler_characteristic() != 1) {
      throw Error("slicing did not produce a disk");
    }
    assign_corners_and_segments(s, genus);
    return s;
  };
  if (genus == 0) {
    auto [vm, vM] = principal_axis_extremes(mesh);
    return finish(slice_along_path(mesh, shortest_path(mesh, vm, vM)));
  }
  if (genus == 1) {
    if (!loop_a || !loop_b) throw Error("genus-one slicing requires two loops");
    return finish(slice_genus_one(mesh, *loop_a, *loop_b));
  }
  throw Error("genus must be 0 or 1");
}

std::pair<CutPath, CutPath> load_loops(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open loops file " + path);
  std::vector<CutPath> loops;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    CutPath p;
    p.closed = true;
    int v;
    while (ss >> v) p.vertices.push_back(v);
    if (!p.vertices.empty()) loops.push_back(std::move(p));
  }
  if (loops.size() != 2) {
    throw Error("loops file must contain exactly two loops, found " +
                std::to_string(loops.size()));
  }
  return {loops[0], loops[1]};
}

}  // namespace sqm
