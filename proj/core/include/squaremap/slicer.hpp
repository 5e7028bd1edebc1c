#pragma once

#include "squaremap/tri_mesh.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace sqm {

/// Vertex path along mesh edges. For closed paths the first vertex is
/// logically also the last but is stored once.
struct CutPath {
  std::vector<int> vertices;
  bool closed = false;

  int length() const { return static_cast<int>(vertices.size()); }
};

/// The four ordered boundary arcs of a sliced disk, mapped to the unit
/// square edges:
///   E: (0,0) -> (1,0)   bottom
///   F: (1,0) -> (1,1)   right
///   G: (0,1) -> (1,1)   top
///   H: (0,0) -> (0,1)   left
/// corners = indices mapped to (0,0), (1,0), (1,1), (0,1) in that order.
/// Genus 0 identifies E with H and F with G entrywise (by cut origin);
/// genus 1 identifies E with G and F with H.
struct BoundarySegments {
  std::vector<int> E, F, G, H;
  std::array<int, 4> corners{-1, -1, -1, -1};
  int genus = 0;
};

/// A mesh cut open along one or two paths, with the provenance of every
/// vertex: origin[v] is the vertex of the original (pre-slice) mesh that v
/// is a copy of. Duplicates have identical coordinates to their origins.
struct SlicedMesh {
  TriMesh mesh;
  std::vector<int> origin;
  std::optional<BoundarySegments> segments;

  // Cut metadata used by assign_corners_and_segments, in original indices.
  CutPath cut_path;          // genus 0
  CutPath loop_a, loop_b;    // genus 1
  int base_vertex = -1;      // genus 1: intersection of the two loops
};

/// Vertices with the extreme projections onto the first principal axis of
/// the vertex set (PCA via SVD of the centered vertex matrix). Ties broken
/// toward the lowest index.
std::pair<int, int> principal_axis_extremes(const TriMesh& mesh);

/// Dijkstra on the edge graph with Euclidean edge lengths. Equal-cost ties
/// choose the lexicographically smallest predecessor.
CutPath shortest_path(const TriMesh& mesh, int a, int b);

/// Cuts the mesh along an open path. Interior path vertices are always
/// duplicated; endpoints only when they lie on a pre-existing boundary.
/// For a two-vertex path there are no interior vertices and both endpoints
/// are duplicated instead, splitting their fans.
SlicedMesh slice_along_path(const TriMesh& mesh, const CutPath& path);

/// Cuts a closed loop (every loop vertex duplicated). On a torus this
/// produces a cylinder: chi unchanged, two boundary loops.
SlicedMesh slice_along_loop(const TriMesh& mesh, const CutPath& loop);

/// Genus-one slicing: cut along loop_a, re-express loop_b in the cut mesh
/// as an open path between the two copies of the base vertex, cut again.
/// The result is a disk whose boundary passes four copies of the base
/// vertex.
SlicedMesh slice_genus_one(const TriMesh& mesh, const CutPath& loop_a,
                           const CutPath& loop_b);

/// Splits the single boundary loop of a sliced disk into the four square
/// segments and stores them in s.segments. For genus 0 the corners are the
/// path endpoints plus the two copies of the path vertex nearest to half
/// the cumulative arc length (ties toward the lower arc length); for genus
/// 1 they are the four copies of the base vertex.
BoundarySegments assign_corners_and_segments(SlicedMesh& s, int genus);

/// Full slicing pipeline: genus 0 uses PCA extremes + shortest path; genus
/// 1 expects the two loops. Returns a disk with segments assigned.
SlicedMesh slice_for_square(const TriMesh& mesh, int genus,
                            const CutPath* loop_a = nullptr,
                            const CutPath* loop_b = nullptr);

/// Reads a loop sidecar file: two lines of whitespace-separated 0-based
/// vertex indices.
std::pair<CutPath, CutPath> load_loops(const std::string& path);

}  // namespace sqm
