#include "squaremap/tri_mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>

namespace sqm {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

uint64_t TriMesh::edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int n = vertex_count();
  for (const Face& f : faces_) {
    for (int v : f) {
      if (v < 0 || v >= n) throw Error("face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw Error("face with repeated vertex");
    }
  }
  repair_orientation();
  build_adjacency();
  validate();
}

void TriMesh::repair_orientation() {
  // Face adjacency over shared undirected edges.
  std::unordered_map<uint64_t, std::vector<int>> edge_face;
  for (int f = 0; f < face_count(); ++f) {
    const Face& fc = faces_[f];
    for (int e = 0; e < 3; ++e) {
      edge_face[edge_key(fc[e], fc[(e + 1) % 3])].push_back(f);
    }
  }
  for (const auto& [key, fs] : edge_face) {
    if (fs.size() > 2) throw Error("non-manifold edge (more than two faces)");
  }

  auto directed = [&](int f, int a, int b) {
    // True if face f contains the directed edge (a, b).
    const Face& fc = faces_[f];
    for (int e = 0; e < 3; ++e) {
      if (fc[e] == a && fc[(e + 1) % 3] == b) return true;
    }
    return false;
  };

  std::vector<int8_t> state(face_count(), 0);  // 0 unseen, 1 keep, -1 flip
  for (int seed = 0; seed < face_count(); ++seed) {
    if (state[seed] != 0) continue;
    state[seed] = 1;
    std::deque<int> queue{seed};
    while (!queue.empty()) {
      int f = queue.front();
      queue.pop_front();
      const Face fc = faces_[f];
      for (int e = 0; e < 3; ++e) {
        int a = fc[e], b = fc[(e + 1) % 3];
        if (state[f] == -1) std::swap(a, b);  // effective direction
        for (int g : edge_face[edge_key(a, b)]) {
          if (g == f) continue;
          // Consistent: g holds (b, a) after applying its own flip state.
          bool g_has_ab = directed(g, a, b);
          int8_t needed = g_has_ab ? -1 : 1;
          if (state[g] == 0) {
            state[g] = needed;
            queue.push_back(g);
          } else if (state[g] != needed) {
            throw Error("inconsistent orientation cannot be repaired");
          }
        }
      }
    }
  }
  for (int f = 0; f < face_count(); ++f) {
    if (state[f] == -1) std::swap(faces_[f][0], faces_[f][1]);
  }
}

void TriMesh::build_adjacency() {
  const int n = vertex_count();
  edge_face_.clear();
  vertex_faces_.assign(n, {});
  vertex_neighbors_.assign(n, {});
  boundary_vertex_.assign(n, false);

  for (int f = 0; f < face_count(); ++f) {
    const Face& fc = faces_[f];
    for (int e = 0; e < 3; ++e) {
      edge_face_[edge_key(fc[e], fc[(e + 1) % 3])].push_back(f);
      vertex_faces_[fc[e]].push_back(f);
    }
  }

  closed_ = true;
  for (const auto& [key, fs] : edge_face_) {
    int a = static_cast<int>(key >> 32);
    int b = static_cast<int>(key & 0xffffffffu);
    vertex_neighbors_[a].push_back(b);
    vertex_neighbors_[b].push_back(a);
    if (fs.size() == 1) {
      closed_ = false;
      boundary_vertex_[a] = true;
      boundary_vertex_[b] = true;
    }
  }
  for (auto& nb : vertex_neighbors_) std::sort(nb.begin(), nb.end());
}

void TriMesh::validate() {
  // Orientation: each interior edge must be used once in each direction.
  std::unordered_map<uint64_t, int> dir_count;
  for (const Face& fc : faces_) {
    for (int e = 0; e < 3; ++e) {
      int a = fc[e], b = fc[(e + 1) % 3];
      uint64_t k = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
      if (++dir_count[k] > 1) throw Error("duplicate directed edge");
    }
  }

  const double diag2 = bbox_diagonal() * bbox_diagonal();
  const double min_area = 1e-12 * diag2;
  for (int f = 0; f < face_count(); ++f) {
    if (face_area(f) < min_area) {
      throw Error("degenerate face " + std::to_string(f));
    }
  }
}

double TriMesh::face_area(int f) const {
  const Face& fc = faces_[f];
  return triangle_area(vertices_[fc[0]], vertices_[fc[1]], vertices_[fc[2]]);
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int f = 0; f < face_count(); ++f) sum += face_area(f);
  return sum;
}

double TriMesh::bbox_diagonal() const {
  if (vertices_.empty()) return 0.0;
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const Vec3& v : vertices_) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  return (hi - lo).norm();
}

TriMesh TriMesh::normalized_to_unit_area(double* scale) const {
  const double area = total_area();
  if (!(area > 0.0)) throw Error("zero-area mesh cannot be normalized");
  const double s = 1.0 / std::sqrt(area);
  std::vector<Vec3> scaled(vertices_.size());
  for (size_t i = 0; i < vertices_.size(); ++i) scaled[i] = s * vertices_[i];
  if (scale) *scale = s;
  return TriMesh(std::move(scaled), faces_);
}

int TriMesh::genus_of_closed() const {
  if (!closed_) throw Error("mesh is not closed");
  const int chi = euler_characteristic();
  if (chi % 2 != 0) throw Error("odd Euler characteristic, corrupt topology");
  return (2 - chi) / 2;
}

std::vector<BoundaryLoop> TriMesh::boundary_loops() const {
  // Directed boundary edges, taken with the direction they appear in their
  // unique adjacent face; the interior then lies to the left.
  std::unordered_map<int, int> next;
  std::vector<int> starts;
  for (const Face& fc : faces_) {
    for (int e = 0; e < 3; ++e) {
      int a = fc[e], b = fc[(e + 1) % 3];
      if (edge_face_.at(edge_key(a, b)).size() == 1) {
        if (next.count(a)) throw Error("non-manifold boundary vertex");
        next[a] = b;
        starts.push_back(a);
      }
    }
  }
  std::sort(starts.begin(), starts.end());

  std::vector<BoundaryLoop> loops;
  std::unordered_map<int, bool> used;
  for (int s : starts) {
    if (used[s]) continue;
    BoundaryLoop loop;
    int v = s;
    do {
      loop.vertices.push_back(v);
      used[v] = true;
      auto it = next.find(v);
      if (it == next.end()) throw Error("open boundary chain");
      v = it->second;
    } while (v != s);
    loops.push_back(std::move(loop));
  }
  return loops;
}

bool TriMesh::has_edge(int a, int b) const {
  return edge_face_.count(edge_key(a, b)) > 0;
}

bool TriMesh::is_boundary_edge(int a, int b) const {
  auto it = edge_face_.find(edge_key(a, b));
  return it != edge_face_.end() && it->second.size() == 1;
}

const std::vector<int>& TriMesh::edge_faces(int a, int b) const {
  auto it = edge_face_.find(edge_key(a, b));
  if (it == edge_face_.end()) throw Error("no such edge");
  return it->second;
}

TriMesh TriMesh::load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);

  std::vector<Vec3> vertices;
  std::vector<Vec2> texcoords;
  std::vector<Face> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) {
        throw Error("bad vertex at line " + std::to_string(lineno));
      }
      vertices.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ss >> t.x() >> t.y())) {
        throw Error("bad texcoord at line " + std::to_string(lineno));
      }
      texcoords.push_back(t);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ss >> tok) {
        // "i", "i/t", "i/t/n", "i//n"; only the vertex index is used.
        size_t slash = tok.find('/');
        int v = std::stoi(slash == std::string::npos ? tok
                                                     : tok.substr(0, slash));
        if (v < 0) v = static_cast<int>(vertices.size()) + v + 1;
        idx.push_back(v - 1);
      }
      if (idx.size() != 3) {
        throw Error("non-triangular face at line " + std::to_string(lineno));
      }
      faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  TriMesh mesh(std::move(vertices), std::move(faces));
  if (texcoords.size() == mesh.vertices_.size()) {
    mesh.texcoords_ = std::move(texcoords);
  }
  return mesh;
}

void TriMesh::save_obj(const std::string& path, const Eigen::VectorXd* uv,
                       const Eigen::VectorXd* vv,
                       bool flatten_positions) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const bool with_uv = uv && vv;
  char buf[128];
  for (int i = 0; i < vertex_count(); ++i) {
    Vec3 p = vertices_[i];
    if (flatten_positions && with_uv) p = Vec3((*uv)[i], (*vv)[i], 0.0);
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(),
                  p.z());
    out << buf;
  }
  if (with_uv) {
    for (int i = 0; i < vertex_count(); ++i) {
      std::snprintf(buf, sizeof(buf), "vt %.17g %.17g\n", (*uv)[i], (*vv)[i]);
      out << buf;
    }
  }
  for (const Face& f : faces_) {
    if (with_uv) {
      std::snprintf(buf, sizeof(buf), "f %d/%d %d/%d %d/%d\n", f[0] + 1,
                    f[0] + 1, f[1] + 1, f[1] + 1, f[2] + 1, f[2] + 1);
    } else {
      std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1,
                    f[2] + 1);
    }
    out << buf;
  }
  if (!out) throw Error("write failure on " + path);
}

}  // namespace sqm
