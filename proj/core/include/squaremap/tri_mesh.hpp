#pragma once

#include "squaremap/common.hpp"

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace sqm {

using Face = std::array<int, 3>;

/// Ordered cyclic list of vertex indices along one boundary component.
/// Consecutive vertices share a boundary edge; the interior of the surface
/// lies to the left of the traversal direction.
struct BoundaryLoop {
  std::vector<int> vertices;
};

/// Indexed triangle mesh with oriented faces and derived adjacency.
///
/// Construction validates the mesh: indices in range, no degenerate faces
/// (area below 1e-12 x squared bounding-box diagonal), at most two faces per
/// edge, and a consistent orientation. If the input orientation is mixed,
/// a breadth-first flip propagation repairs it; an unresolvable conflict
/// (non-orientable input) fails construction.
///
/// Instances are immutable after construction and safe for concurrent reads.
class TriMesh {
 public:
  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  /// Reads a Wavefront OBJ file (v/f records; vt records are parsed when
  /// present and available through texcoords()). Indices are 1-based on
  /// disk, 0-based in memory.
  static TriMesh load_obj(const std::string& path);

  /// Writes v/f records. When uv/vv are given (size n), also writes vt
  /// records and f records in the i/i form. When flatten_positions is set,
  /// v records hold (u, v, 0) instead of the 3D positions.
  void save_obj(const std::string& path,
                const Eigen::VectorXd* uv = nullptr,
                const Eigen::VectorXd* vv = nullptr,
                bool flatten_positions = false) const;

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }
  int edge_count() const { return static_cast<int>(edge_face_.size()); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const Vec3& vertex(int v) const { return vertices_[v]; }
  const Face& face(int f) const { return faces_[f]; }

  /// Per-vertex texture coordinates carried over from an OBJ file
  /// (empty unless the file had one vt per vertex).
  const std::vector<Vec2>& texcoords() const { return texcoords_; }

  double face_area(int f) const;
  double total_area() const;
  double bbox_diagonal() const;

  /// Uniformly scaled copy with total area 1. scale receives the factor
  /// applied to the vertex coordinates.
  TriMesh normalized_to_unit_area(double* scale = nullptr) const;

  bool is_closed() const { return closed_; }

  /// Genus from the Euler characteristic chi = n - |E| + m = 2 - 2g.
  /// Throws if the mesh is not closed or chi is odd.
  int genus_of_closed() const;

  int euler_characteristic() const {
    return vertex_count() - edge_count() + face_count();
  }

  /// All boundary loops, each ordered with the interior to the left.
  /// Empty for closed meshes.
  std::vector<BoundaryLoop> boundary_loops() const;

  bool has_edge(int a, int b) const;
  bool is_boundary_vertex(int v) const { return boundary_vertex_[v]; }
  bool is_boundary_edge(int a, int b) const;

  /// Faces adjacent to the undirected edge (a, b); one or two entries.
  const std::vector<int>& edge_faces(int a, int b) const;

  const std::vector<int>& vertex_faces(int v) const { return vertex_faces_[v]; }

  /// Vertex adjacency, sorted ascending.
  const std::vector<int>& vertex_neighbors(int v) const {
    return vertex_neighbors_[v];
  }

 private:
  static uint64_t edge_key(int a, int b);
  void build_adjacency();
  void repair_orientation();
  void validate();

  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec2> texcoords_;

  std::unordered_map<uint64_t, std::vector<int>> edge_face_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::vector<bool> boundary_vertex_;
  bool closed_ = false;
};

}  // namespace sqm
