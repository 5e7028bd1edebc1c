// Acceptance suite: one checkable criterion per function, each printing a
// single PASS/FAIL line. Run with no arguments for all criteria or with a
// list of criterion numbers. The exit code is the number of failures.

#include "squaremap/generators.hpp"
#include "squaremap/pipeline.hpp"

#include "../support/test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sqm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct E2ERun {
  TriMesh original;
  PreparedMesh prep;
  SolveResult solve;
  ParamMap final_map;
  int folds_before = 0;
  int folds_after = 0;
  double solve_seconds = 0.0;
};

E2ERun make_run(const TriMesh& mesh, int genus, const CutPath* la,
                const CutPath* lb) {
  const auto t0 = Clock::now();
  E2ERun run{mesh, prepare_mesh(mesh, genus, la, lb), {}, {}, 0, 0, 0.0};
  SolverConfig cfg;  // defaults: 10 FPM rounds, 200 CG cap, 1e-6 deficit
  run.solve = pcg_minimize(run.prep.solve_mesh, *run.prep.sliced.segments, cfg,
                           AreaMeasure::face_areas(run.prep.solve_mesh));
  run.final_map = run.solve.map;
  run.folds_before = count_folded(run.prep.solve_mesh, run.final_map).count;
  run.folds_after = run.folds_before;
  if (run.folds_before > 0) {
    run.final_map = correct_overlaps(run.prep.solve_mesh, run.final_map,
                                     *run.prep.sliced.segments);
    run.folds_after = count_folded(run.prep.solve_mesh, run.final_map).count;
  }
  run.solve_seconds = seconds_since(t0);
  return run;
}

E2ERun& genus0_run() {
  static E2ERun run = make_run(make_icosphere(3), 0, nullptr, nullptr);
  return run;
}

E2ERun& genus1_run() {
  static auto loops = canonical_torus_loops(24, 24);
  static E2ERun run =
      make_run(make_torus(24, 24), 1, &loops.first, &loops.second);
  return run;
}

// ---- criteria ----

bool criterion_variance_identity(std::string& detail) {
  const auto t0 = Clock::now();
  TriMesh sphere = make_icosphere(3);
  SlicedMesh sliced = slice_for_square(sphere, 0);
  const TriMesh& disk = sliced.mesh;
  const double total = disk.total_area();

  std::mt19937 rng(12345);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ParamMap f = test_support::random_map(disk.vertex_count(), rng);
    const double e_a = authalic_energy(disk, f);
    const double area = image_area(disk, f);
    RatioStats st = ratio_statistics(disk, f);
    const double gap =
        std::abs(st.weighted_variance - area / (total * total) * e_a);
    worst = std::max(worst, gap / std::max(1.0, e_a));
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "faces=" << disk.face_count() << " worst=" << worst
     << " time=" << elapsed << "s";
  detail = os.str();
  return disk.face_count() == 1280 && worst <= 1e-10 && elapsed < 10.0;
}

bool criterion_nonnegativity(std::string& detail) {
  TriMesh sphere = make_icosphere(2);
  SlicedMesh sliced = slice_for_square(sphere, 0);
  std::mt19937 rng(777);
  double lowest = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ParamMap f = test_support::random_map(sliced.mesh.vertex_count(), rng);
    lowest = std::min(lowest, authalic_energy(sliced.mesh, f));
  }
  // Exactly area-preserving construction: identity on a flat mesh.
  TriMesh grid = make_flat_grid(8);
  ParamMap id;
  id.u.resize(grid.vertex_count());
  id.v.resize(grid.vertex_count());
  for (int i = 0; i < grid.vertex_count(); ++i) {
    id.u[i] = grid.vertex(i).x();
    id.v[i] = grid.vertex(i).y();
  }
  const double exact = authalic_energy(grid, id);
  std::ostringstream os;
  os << "min E_A=" << lowest << " flat identity E_A=" << exact;
  detail = os.str();
  return lowest >= -1e-12 && exact < 1e-12;
}

bool check_bound_on_rows(const E2ERun& run, double* worst_margin) {
  const TriMesh& mesh = run.prep.solve_mesh;
  const double total = mesh.total_area();
  double min_area = 1e300;
  for (int t = 0; t < mesh.face_count(); ++t) {
    min_area = std::min(min_area, mesh.face_area(t));
  }
  bool ok = true;
  for (const auto& row : run.solve.trajectory) {
    const double bound =
        row.area * row.e_a / (mesh.face_count() * total * min_area);
    const double slack = bound * (1 + 1e-9) + 1e-15 - row.unweighted_var;
    if (worst_margin) *worst_margin = std::min(*worst_margin, slack);
    ok = ok && slack >= 0.0;
  }
  return ok;
}

bool criterion_bound(std::string& detail) {
  double margin = 1e300;
  const bool ok0 = check_bound_on_rows(genus0_run(), &margin);
  const bool ok1 = check_bound_on_rows(genus1_run(), &margin);
  std::ostringstream os;
  os << "worst slack=" << margin << " over "
     << genus0_run().solve.trajectory.size() +
            genus1_run().solve.trajectory.size()
     << " iterates";
  detail = os.str();
  return ok0 && ok1;
}

bool gradient_check(const TriMesh& mesh, const BoundarySegments& segments,
                    double* worst) {
  FreeLayout layout(mesh, segments);
  const AreaMeasure rho = AreaMeasure::face_areas(mesh);
  SolverConfig cfg;
  cfg.fpm_iters = 3;
  FixedPointResult fpr = fixed_point_init(mesh, segments, cfg, rho);

  Eigen::VectorXd x = layout.restrict(fpr.map);
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  for (int i = 0; i < x.size(); ++i) x[i] += jitter(rng);

  ParamMap f = layout.expand(x);
  std::vector<int> clamped;
  Eigen::VectorXd g = stretch_gradient(mesh, f, rho, layout, &clamped);
  if (!clamped.empty()) return false;  // stay away from clamped faces

  const double gmax = g.cwiseAbs().maxCoeff();
  std::uniform_int_distribution<int> pick(0, layout.free_size() - 1);
  bool ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const int coord = pick(rng);
    const double fd =
        test_support::fd_gradient_entry(mesh, layout, rho, x, coord, 1e-6);
    const double scale = std::max({std::abs(fd), std::abs(g[coord]),
                                   1e-6 * gmax});
    const double rel = std::abs(g[coord] - fd) / scale;
    *worst = std::max(*worst, rel);
    ok = ok && rel <= 1e-6;
  }
  return ok;
}

bool criterion_gradient(std::string& detail) {
  double worst = 0.0;
  TriMesh sphere = make_icosphere(2).normalized_to_unit_area();
  SlicedMesh s0 = slice_for_square(sphere, 0);
  const bool ok0 = gradient_check(s0.mesh, *s0.segments, &worst);

  TriMesh torus = make_torus(16, 16).normalized_to_unit_area();
  auto loops = canonical_torus_loops(16, 16);
  SlicedMesh s1 = slice_for_square(torus, 1, &loops.first, &loops.second);
  const bool ok1 = gradient_check(s1.mesh, *s1.segments, &worst);

  std::ostringstream os;
  os << "worst relative error=" << worst;
  detail = os.str();
  return ok0 && ok1;
}

bool end_to_end(const E2ERun& run, double time_budget, std::string& detail) {
  RatioStats final_stats = ratio_statistics(run.prep.solve_mesh, run.final_map);
  const double harmonic_sd = run.solve.harmonic_stats.r_area_sd;
  std::ostringstream os;
  os << "R_SD=" << final_stats.r_area_sd << " harmonic=" << harmonic_sd
     << " folds " << run.folds_before << "->" << run.folds_after << " iters="
     << run.solve.cg_iterations << " time=" << run.solve_seconds << "s";
  detail = os.str();
  const bool rare_failures =
      run.solve.linesearch_failures * 20 <= std::max(run.solve.cg_iterations, 1);
  return run.solve.cg_iterations <= 200 && final_stats.r_area_sd < 0.1 &&
         final_stats.r_area_sd <= harmonic_sd / 5.0 && run.folds_after == 0 &&
         rare_failures && run.solve_seconds < time_budget;
}

bool criterion_genus0(std::string& detail) {
  return end_to_end(genus0_run(), 30.0, detail);
}

bool criterion_genus1(std::string& detail) {
  return end_to_end(genus1_run(), 30.0, detail);
}

bool trajectory_monotone(const E2ERun& run, double* worst_rate) {
  const auto& rows = run.solve.trajectory;
  const size_t begin = rows.size() / 5;  // last 80 percent
  if (rows.size() < begin + 2) return true;
  int steps = 0, bad_ea = 0, bad_var = 0;
  for (size_t i = begin; i + 1 < rows.size(); ++i) {
    ++steps;
    if (rows[i + 1].e_a > rows[i].e_a + 1e-12) ++bad_ea;
    if (rows[i + 1].weighted_var > rows[i].weighted_var + 1e-12) ++bad_var;
  }
  const double rate =
      static_cast<double>(std::max(bad_ea, bad_var)) / std::max(steps, 1);
  *worst_rate = std::max(*worst_rate, rate);
  return rate <= 0.05;
}

bool criterion_trajectory(std::string& detail) {
  double rate = 0.0;
  const bool ok0 = trajectory_monotone(genus0_run(), &rate);
  const bool ok1 = trajectory_monotone(genus1_run(), &rate);
  std::ostringstream os;
  os << "worst violation rate=" << rate;
  detail = os.str();
  return ok0 && ok1;
}

bool criterion_fold_repair(std::string& detail) {
  const int k = 6;
  TriMesh grid = make_flat_grid(k);
  BoundarySegments seg = flat_grid_segments(k);
  ParamMap f;
  f.u.resize(grid.vertex_count());
  f.v.resize(grid.vertex_count());
  for (int i = 0; i < grid.vertex_count(); ++i) {
    f.u[i] = grid.vertex(i).x();
    f.v[i] = grid.vertex(i).y();
  }
  const int victim = 3 * (k + 1) + 3;
  f.u[victim] = 0.05;
  f.v[victim] = 0.97;
  const int before = count_folded(grid, f).count;

  ParamMap fixed = correct_overlaps(grid, f, seg);
  const int after = count_folded(grid, fixed).count;

  bool boundary_identical = true;
  for (const auto* part : {&seg.E, &seg.F, &seg.G, &seg.H}) {
    for (int v : *part) {
      boundary_identical = boundary_identical && fixed.u[v] == f.u[v] &&
                           fixed.v[v] == f.v[v];
    }
  }
  std::ostringstream os;
  os << "folds " << before << "->" << after
     << (boundary_identical ? ", boundary bit-exact" : ", boundary CHANGED");
  detail = os.str();
  return before >= 1 && after == 0 && boundary_identical;
}

bool criterion_geometry_image(std::string& detail) {
  E2ERun& run = genus0_run();
  const auto t0 = Clock::now();
  GeometryImage img = encode(run.prep.sliced.mesh, run.final_map, 200, 0);
  DecodeResult recon = decode(img);
  const double dist = test_support::symmetric_mean_surface_distance(
      run.original, recon.mesh);
  const double elapsed = seconds_since(t0);
  const double rel = dist / run.original.bbox_diagonal();
  std::ostringstream os;
  os << "mean distance=" << rel * 100 << "% of bbox diagonal, fallbacks="
     << img.fallback_pixels << ", time=" << elapsed << "s";
  detail = os.str();
  return rel <= 0.01 && img.fallback_pixels == 0 && elapsed < 20.0;
}

bool criterion_beltrami(std::string& detail) {
  E2ERun& run = genus0_run();
  const TriMesh& mesh = run.prep.solve_mesh;
  const BoundarySegments& seg = *run.prep.sliced.segments;
  SolverConfig cfg;
  SolveResult constant = constant_area_param(mesh, seg, cfg);

  BeltramiField mu = beltrami_coefficient(mesh, constant.harmonic,
                                          constant.map);
  double max_in = 0.0;
  for (const auto& m : mu.mu) max_in = std::max(max_in, std::abs(m));

  ParamMap out =
      truncate_and_reconstruct(mesh, constant.harmonic, mu, 0.8, seg);
  BeltramiField mu_out = beltrami_coefficient(mesh, constant.harmonic, out);
  double max_out = 0.0;
  for (const auto& m : mu_out.mu) max_out = std::max(max_out, std::abs(m));

  std::ostringstream os;
  os << "max |mu| " << max_in << " -> " << max_out << " (delta 0.8)";
  detail = os.str();
  return max_out <= 0.85;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

bool criterion_determinism(std::string& detail) {
  const char* env = std::getenv("SQUAREMAP_CLI");
  const std::string cli = env ? env : "./tools/squaremap";
  auto run_cli = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  if (run_cli("gen icosphere --subdiv 2 --out tmp_acc_ico.obj") != 0) {
    detail = "cannot run the CLI at " + cli;
    return false;
  }
  const std::string base =
      "param --input tmp_acc_ico.obj --genus 0 --seed 7 --out tmp_acc_map";
  if (run_cli(base + "1.obj --report tmp_acc_r1.csv --summary tmp_acc_s1.json") != 0 ||
      run_cli(base + "2.obj --report tmp_acc_r2.csv --summary tmp_acc_s2.json") != 0) {
    detail = "pipeline run failed";
    return false;
  }
  const std::string r1 = read_file("tmp_acc_r1.csv");
  const std::string r2 = read_file("tmp_acc_r2.csv");
  const std::string s1 = read_file("tmp_acc_s1.json");
  const std::string s2 = read_file("tmp_acc_s2.json");
  for (const char* f :
       {"tmp_acc_ico.obj", "tmp_acc_map1.obj", "tmp_acc_map2.obj",
        "tmp_acc_r1.csv", "tmp_acc_r2.csv", "tmp_acc_s1.json",
        "tmp_acc_s2.json"}) {
    std::remove(f);
  }
  std::ostringstream os;
  os << "csv " << r1.size() << " bytes, json " << s1.size() << " bytes";
  detail = os.str();
  return !r1.empty() && r1 == r2 && !s1.empty() && s1 == s2;
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "weighted variance identity on random maps", criterion_variance_identity},
      {2, "authalic energy nonnegativity", criterion_nonnegativity},
      {3, "unweighted variance bound on every iterate", criterion_bound},
      {4, "analytic gradient vs central differences", criterion_gradient},
      {5, "end-to-end genus 0 (icosphere, 1280 faces)", criterion_genus0},
      {6, "end-to-end genus 1 (24x24 torus)", criterion_genus1},
      {7, "energy and variance trajectories non-increasing", criterion_trajectory},
      {8, "fold repair via one mean-value correction", criterion_fold_repair},
      {9, "geometry image round trip at n=200", criterion_geometry_image},
      {10, "beltrami truncation pipeline at delta=0.8", criterion_beltrami},
      {11, "byte-identical CLI artifacts", criterion_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& c : criteria()) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
      continue;
    }
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id,
                c.title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
