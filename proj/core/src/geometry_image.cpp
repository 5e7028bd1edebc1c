#include "squaremap/geometry_image.hpp"

#include "png16.hpp"

#include <Eigen/Dense>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

namespace sqm {

namespace {

struct Bary {
  int face = -1;
  double l0 = 0, l1 = 0, l2 = 0;
};

struct TriangleGrid {
  int cells = 0;
  std::vector<std::vector<int>> bins;

  TriangleGrid(const TriMesh& mesh, const ParamMap& f, int cells_)
      : cells(cells_), bins(static_cast<size_t>(cells_) * cells_) {
    for (int t = 0; t < mesh.face_count(); ++t) {
      const Face& fc = mesh.face(t);
      double lo_u = 1e300, hi_u = -1e300, lo_v = 1e300, hi_v = -1e300;
      for (int v : fc) {
        lo_u = std::min(lo_u, f.u[v]);
        hi_u = std::max(hi_u, f.u[v]);
        lo_v = std::min(lo_v, f.v[v]);
        hi_v = std::max(hi_v, f.v[v]);
      }
      const int i0 = clamp_cell(lo_u), i1 = clamp_cell(hi_u);
      const int j0 = clamp_cell(lo_v), j1 = clamp_cell(hi_v);
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
          bins[static_cast<size_t>(j) * cells + i].push_back(t);
        }
      }
    }
  }

  int clamp_cell(double x) const {
    return std::clamp(static_cast<int>(x * cells), 0, cells - 1);
  }

  const std::vector<int>& at(double u, double v) const {
    return bins[static_cast<size_t>(clamp_cell(v)) * cells + clamp_cell(u)];
  }
};

double cross2(const Vec2& a, const Vec2& b) {
  return a.x() * b.y() - a.y() * b.x();
}

bool barycentric_in(const ParamMap& f, const Face& fc, const Vec2& q,
                    Bary* out) {
  const Vec2 a = f.at(fc[0]), b = f.at(fc[1]), c = f.at(fc[2]);
  const double total = cross2(b - a, c - a);
  if (std::abs(total) < 1e-300) return false;
  const double w0 = cross2(b - q, c - q) / total;
  const double w1 = cross2(c - q, a - q) / total;
  const double w2 = cross2(a - q, b - q) / total;
  if (w0 < -1e-12 || w1 < -1e-12 || w2 < -1e-12) return false;
  out->l0 = w0;
  out->l1 = w1;
  out->l2 = w2;
  return true;
}

double point_segment_dist2(const Vec2& p, const Vec2& a, const Vec2& b,
                           double* t_out) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  if (t_out) *t_out = t;
  return (a + t * ab - p).squaredNorm();
}

/// Closest point in a triangle: either the query itself or a point on an
/// edge, returned in barycentric form.
double closest_bary(const ParamMap& f, const Face& fc, const Vec2& q,
                    Bary* out) {
  if (barycentric_in(f, fc, q, out)) return 0.0;
  const Vec2 p[3] = {f.at(fc[0]), f.at(fc[1]), f.at(fc[2])};
  double best = std::numeric_limits<double>::max();
  for (int e = 0; e < 3; ++e) {
    double t = 0;
    const double d2 = point_segment_dist2(q, p[e], p[(e + 1) % 3], &t);
    if (d2 < best) {
      best = d2;
      double l[3] = {0, 0, 0};
      l[e] = 1.0 - t;
      l[(e + 1) % 3] = t;
      out->l0 = l[0];
      out->l1 = l[1];
      out->l2 = l[2];
    }
  }
  return best;
}

}  // namespace

GeometryImage encode(const TriMesh& mesh, const ParamMap& f, int n, int genus,
                     int threads) {
  if (n < 2) throw Error("geometry image resolution must be >= 2");
  if (f.size() != mesh.vertex_count()) throw Error("map size mismatch");

  GeometryImage img;
  img.n = n;
  img.genus = genus;
  img.samples.assign(static_cast<size_t>(n) * n, Vec3::Zero());

  const TriangleGrid grid(mesh, f, std::clamp(n, 16, 256));

  std::vector<int> fallbacks(std::max(threads, 1), 0);

  auto sample_rows = [&](int j0, int j1, int slot) {
    Bary bc;
    for (int j = j0; j < j1; ++j) {
      const double v = static_cast<double>(j) / (n - 1);
      for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(i) / (n - 1);
        const Vec2 q(u, v);
        int face = -1;
        for (int t : grid.at(u, v)) {
          if (barycentric_in(f, mesh.face(t), q, &bc)) {
            face = t;
            break;
          }
        }
        if (face < 0) {
          // Not inside any candidate triangle: nearest triangle overall.
          ++fallbacks[slot];
          double best = std::numeric_limits<double>::max();
          Bary best_bc;
          for (int t = 0; t < mesh.face_count(); ++t) {
            Bary tmp;
            const double d2 = closest_bary(f, mesh.face(t), q, &tmp);
            if (d2 < best) {
              best = d2;
              best_bc = tmp;
              face = t;
            }
          }
          bc = best_bc;
        }
        const Face& fc = mesh.face(face);
        img.at(i, j) = bc.l0 * mesh.vertex(fc[0]) + bc.l1 * mesh.vertex(fc[1]) +
                       bc.l2 * mesh.vertex(fc[2]);
      }
    }
  };

  threads = std::max(threads, 1);
  if (threads == 1) {
    sample_rows(0, n, 0);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int j0 = t * chunk, j1 = std::min(n, j0 + chunk);
      if (j0 >= j1) break;
      pool.emplace_back(sample_rows, j0, j1, t);
    }
    for (auto& th : pool) th.join();
  }
  for (int c : fallbacks) img.fallback_pixels += c;

  img.channel_min = Vec3::Constant(std::numeric_limits<double>::max());
  img.channel_max = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const Vec3& s : img.samples) {
    img.channel_min = img.channel_min.cwiseMin(s);
    img.channel_max = img.channel_max.cwiseMax(s);
  }
  return img;
}

DecodeResult decode(const GeometryImage& img) {
  const int n = img.n;
  if (n < 2) throw Error("geometry image resolution must be >= 2");
  const int grid_count = n * n;

  // Identified sample pairs for the seam, by genus.
  std::vector<std::pair<int, int>> pairs;
  auto id = [n](int i, int j) { return j * n + i; };
  if (img.genus == 0) {
    // Fold: bottom onto left, right onto top. The first pair off each fold
    // corner is skipped: merging it would force two distinct edges onto the
    // same vertex pair (the quad diagonal sample is adjacent to both seam
    // copies), which has no manifold representation. Those two pairs remain
    // zero-width slits.
    for (int i = 2; i < n; ++i) pairs.push_back({id(i, 0), id(0, i)});
    for (int j = 0; j + 2 < n; ++j) pairs.push_back({id(n - 1, j), id(j, n - 1)});
  } else {
    for (int i = 0; i < n; ++i) pairs.push_back({id(i, 0), id(i, n - 1)});
    for (int j = 0; j < n; ++j) pairs.push_back({id(0, j), id(n - 1, j)});
  }

  // Union-find over grid samples.
  std::vector<int> parent(grid_count);
  for (int i = 0; i < grid_count; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : pairs) parent[find(a)] = find(b);

  // Group averages and the weld tolerance check.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const Vec3& s : img.samples) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  const double tol = 1e-3 * (hi - lo).norm();

  std::vector<Vec3> group_sum(grid_count, Vec3::Zero());
  std::vector<int> group_count(grid_count, 0);
  for (int i = 0; i < grid_count; ++i) {
    const int r = find(i);
    group_sum[r] += img.samples[i];
    group_count[r] += 1;
  }

  double max_err = 0.0;
  for (int i = 0; i < grid_count; ++i) {
    const int r = find(i);
    const Vec3 avg = group_sum[r] / group_count[r];
    max_err = std::max(max_err, (img.samples[i] - avg).norm());
  }
  const bool weld = max_err <= tol;

  // Vertex table: welded grid representatives (or all samples when the weld
  // is rejected), then one center per quad.
  std::vector<int> remap(grid_count, -1);
  std::vector<Vec3> verts;
  if (weld) {
    for (int i = 0; i < grid_count; ++i) {
      const int r = find(i);
      if (remap[r] < 0) {
        remap[r] = static_cast<int>(verts.size());
        verts.push_back(group_sum[r] / group_count[r]);
      }
      remap[i] = remap[r];
    }
  } else {
    for (int i = 0; i < grid_count; ++i) {
      remap[i] = static_cast<int>(verts.size());
      verts.push_back(img.samples[i]);
    }
  }

  std::vector<Face> faces;
  faces.reserve(4 * static_cast<size_t>(n - 1) * (n - 1));
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int c00 = remap[id(i, j)], c10 = remap[id(i + 1, j)];
      const int c11 = remap[id(i + 1, j + 1)], c01 = remap[id(i, j + 1)];
      const int m = static_cast<int>(verts.size());
      verts.push_back(0.25 * (verts[c00] + verts[c10] + verts[c11] + verts[c01]));
      faces.push_back({c00, c10, m});
      faces.push_back({c10, c11, m});
      faces.push_back({c11, c01, m});
      faces.push_back({c01, c00, m});
    }
  }

  DecodeResult out{TriMesh(std::move(verts), std::move(faces)), weld, max_err};
  return out;
}

namespace {

uint16_t quantize(double x, double lo, double hi) {
  if (!(hi > lo)) return 0;
  const double t = (x - lo) / (hi - lo);
  return static_cast<uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
}

double dequantize(uint16_t q, double lo, double hi) {
  if (!(hi > lo)) return lo;
  return lo + static_cast<double>(q) / 65535.0 * (hi - lo);
}

}  // namespace

void save_geometry_image(const GeometryImage& img, const std::string& png_path,
                         const std::string& json_path) {
  detail::Png16 png;
  png.width = img.n;
  png.height = img.n;
  png.pixels.resize(static_cast<size_t>(img.n) * img.n * 3);

  // Image row 0 is the top of the picture: grid row j = n - 1.
  for (int r = 0; r < img.n; ++r) {
    const int j = img.n - 1 - r;
    for (int i = 0; i < img.n; ++i) {
      const Vec3& s = img.at(i, j);
      const size_t base = (static_cast<size_t>(r) * img.n + i) * 3;
      for (int c = 0; c < 3; ++c) {
        png.pixels[base + c] = quantize(s[c], img.channel_min[c],
                                        img.channel_max[c]);
      }
    }
  }
  detail::write_png16(png_path, png);

  nlohmann::ordered_json meta;
  meta["format"] = "squaremap-gimg";
  meta["n"] = img.n;
  meta["genus"] = img.genus;
  meta["weld"] = img.genus == 0 ? "fold" : "torus";
  meta["min"] = {img.channel_min[0], img.channel_min[1], img.channel_min[2]};
  meta["max"] = {img.channel_max[0], img.channel_max[1], img.channel_max[2]};
  meta["fallback_pixels"] = img.fallback_pixels;

  std::ofstream out(json_path);
  if (!out) throw Error("cannot write " + json_path);
  out << meta.dump(2) << "\n";
}

GeometryImage load_geometry_image(const std::string& png_path,
                                  const std::string& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error("cannot open " + json_path);
  nlohmann::json meta = nlohmann::json::parse(in);

  GeometryImage img;
  img.n = meta.at("n").get<int>();
  img.genus = meta.at("genus").get<int>();
  img.fallback_pixels = meta.value("fallback_pixels", 0);
  for (int c = 0; c < 3; ++c) {
    img.channel_min[c] = meta.at("min")[c].get<double>();
    img.channel_max[c] = meta.at("max")[c].get<double>();
  }

  detail::Png16 png = detail::read_png16(png_path);
  if (png.width != img.n || png.height != img.n) {
    throw Error("png size does not match sidecar");
  }
  img.samples.assign(static_cast<size_t>(img.n) * img.n, Vec3::Zero());
  for (int r = 0; r < img.n; ++r) {
    const int j = img.n - 1 - r;
    for (int i = 0; i < img.n; ++i) {
      const size_t base = (static_cast<size_t>(r) * img.n + i) * 3;
      for (int c = 0; c < 3; ++c) {
        img.at(i, j)[c] = dequantize(png.pixels[base + c], img.channel_min[c],
                                     img.channel_max[c]);
      }
    }
  }
  return img;
}

void save_geometry_image_f32(const GeometryImage& img,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const char magic[4] = {'G', 'I', 'M', 'F'};
  out.write(magic, 4);
  const int32_t header[3] = {static_cast<int32_t>(img.n),
                             static_cast<int32_t>(img.genus),
                             static_cast<int32_t>(img.fallback_pixels)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  std::vector<float> buf(img.samples.size() * 3);
  for (size_t i = 0; i < img.samples.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      buf[i * 3 + c] = static_cast<float>(img.samples[i][c]);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

GeometryImage load_geometry_image_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, "GIMF", 4) != 0) throw Error("bad float container magic");
  int32_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  GeometryImage img;
  img.n = header[0];
  img.genus = header[1];
  img.fallback_pixels = header[2];
  if (img.n < 2) throw Error("bad float container header");
  std::vector<float> buf(static_cast<size_t>(img.n) * img.n * 3);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw Error("truncated float container");
  img.samples.resize(static_cast<size_t>(img.n) * img.n);
  img.channel_min = Vec3::Constant(std::numeric_limits<double>::max());
  img.channel_max = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (size_t i = 0; i < img.samples.size(); ++i) {
    for (int c = 0; c < 3; ++c) img.samples[i][c] = buf[i * 3 + c];
    img.channel_min = img.channel_min.cwiseMin(img.samples[i]);
    img.channel_max = img.channel_max.cwiseMax(img.samples[i]);
  }
  return img;
}

BeltramiField beltrami_coefficient(const TriMesh& mesh, const ParamMap& from,
                                   const ParamMap& to) {
  BeltramiField field;
  field.mu.resize(mesh.face_count());
  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    Eigen::Matrix2d P, Q;
    P.col(0) = from.at(fc[1]) - from.at(fc[0]);
    P.col(1) = from.at(fc[2]) - from.at(fc[0]);
    Q.col(0) = to.at(fc[1]) - to.at(fc[0]);
    Q.col(1) = to.at(fc[2]) - to.at(fc[0]);
    const double det = P.determinant();
    if (std::abs(det) < 1e-300) throw Error("degenerate source triangle");
    const Eigen::Matrix2d J = Q * P.inverse();
    const double a = 0.5 * (J(0, 0) + J(1, 1));
    const double b = 0.5 * (J(1, 0) - J(0, 1));
    const double c = 0.5 * (J(0, 0) - J(1, 1));
    const double d = 0.5 * (J(1, 0) + J(0, 1));
    field.mu[t] = std::complex<double>(c, d) / std::complex<double>(a, b);
  }
  return field;
}

BeltramiField truncate_beltrami(const BeltramiField& field, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
  BeltramiField out = field;
  for (auto& mu : out.mu) {
    // Rescale until the magnitude is at or below delta, so truncating a
    // second time returns the value unchanged.
    for (int guard = 0; guard < 64; ++guard) {
      const double mag = std::abs(mu);
      if (!(mag > delta)) break;
      mu *= delta / mag;
    }
    while (std::abs(mu) > delta) {
      mu = {std::nextafter(mu.real(), 0.0), std::nextafter(mu.imag(), 0.0)};
    }
  }
  return out;
}

ParamMap reconstruct_from_beltrami(const TriMesh& mesh, const ParamMap& f_from,
                                   const BeltramiField& mu,
                                   const BoundarySegments& segments) {
  const int n = mesh.vertex_count();
  if (static_cast<int>(mu.mu.size()) != mesh.face_count()) {
    throw Error("beltrami field size mismatch");
  }

  // A-weighted stiffness on the f_from domain: per face, K_ab =
  // |tau| grad(phi_a)^T A grad(phi_b) with hat-function gradients.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.face_count() * 9);
  for (int t = 0; t < mesh.face_count(); ++t) {
    const Face& fc = mesh.face(t);
    const Vec2 p[3] = {f_from.at(fc[0]), f_from.at(fc[1]), f_from.at(fc[2])};
    const double area2 = cross2(p[1] - p[0], p[2] - p[0]);  // 2 * signed area
    if (std::abs(area2) < 1e-14) throw Error("degenerate domain triangle");

    const double pr = mu.mu[t].real(), pi = mu.mu[t].imag();
    const double s = 1.0 - pr * pr - pi * pi;
    if (!(s > 0.0)) throw Error("beltrami magnitude must stay below 1");
    Eigen::Matrix2d A;
    A << ((1 - pr) * (1 - pr) + pi * pi) / s, -2 * pi / s,
         -2 * pi / s, ((1 + pr) * (1 + pr) + pi * pi) / s;

    Vec2 grad[3];
    for (int corner = 0; corner < 3; ++corner) {
      const Vec2 e = p[(corner + 2) % 3] - p[(corner + 1) % 3];
      grad[corner] = Vec2(-e.y(), e.x()) / area2;
    }
    const double measure = 0.5 * std::abs(area2);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        trip.emplace_back(fc[a], fc[b],
                          measure * grad[a].dot(A * grad[b]));
      }
    }
  }
  SparseMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  // Quadratic minimization over the free variables of the square
  // constraints; the segment values slide along their edges.
  FreeLayout layout(mesh, segments);
  SparseMat K_red;
  Eigen::VectorXd rhs;
  layout.reduce_quadratic(K, &K_red, &rhs);

  Eigen::SimplicialLDLT<SparseMat> solver;
  solver.compute(K_red);
  if (solver.info() != Eigen::Success) {
    throw Error("beltrami reconstruction system is singular");
  }
  return layout.expand(solver.solve(rhs));
}

ParamMap truncate_and_reconstruct(const TriMesh& mesh, const ParamMap& f_from,
                                  const BeltramiField& mu, double delta,
                                  const BoundarySegments& segments) {
  return reconstruct_from_beltrami(mesh, f_from, truncate_beltrami(mu, delta),
                                   segments);
}

SolveResult constant_area_param(const TriMesh& mesh,
                                const BoundarySegments& segments,
                                const SolverConfig& cfg) {
  return pcg_minimize(mesh, segments, cfg, AreaMeasure::constant(mesh));
}

}  // namespace sqm
