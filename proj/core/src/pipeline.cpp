#include "squaremap/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>

namespace sqm {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string stem_of(const std::string& path) {
  size_t slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace

PreparedMesh prepare_mesh(const TriMesh& mesh, int genus, const CutPath* loop_a,
                          const CutPath* loop_b) {
  if (!mesh.is_closed()) throw Error("input mesh is not closed");
  const int g = mesh.genus_of_closed();
  if (g != genus) {
    throw Error("input mesh has genus " + std::to_string(g) +
                ", expected " + std::to_string(genus));
  }
  SlicedMesh sliced = slice_for_square(mesh, genus, loop_a, loop_b);
  double scale = 1.0;
  TriMesh solve_mesh = sliced.mesh.normalized_to_unit_area(&scale);
  return PreparedMesh{std::move(sliced), std::move(solve_mesh), scale};
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();

  TriMesh input = TriMesh::load_obj(cfg.input);

  CutPath loop_a, loop_b;
  const CutPath* pa = nullptr;
  const CutPath* pb = nullptr;
  if (cfg.genus == 1) {
    if (cfg.loops_path.empty()) throw Error("loops file required");
    std::tie(loop_a, loop_b) = load_loops(cfg.loops_path);
    pa = &loop_a;
    pb = &loop_b;
  }

  PreparedMesh prep = prepare_mesh(input, cfg.genus, pa, pb);
  const BoundarySegments& segments = *prep.sliced.segments;

  AreaMeasure rho = cfg.rho_mode == "const"
                        ? AreaMeasure::constant(prep.solve_mesh)
                        : AreaMeasure::face_areas(prep.solve_mesh);

  PipelineResult result;
  result.solve = pcg_minimize(prep.solve_mesh, segments, cfg.solver, rho);
  result.map = result.solve.map;

  FoldReport folds = count_folded(prep.solve_mesh, result.map);
  result.folds_before = folds.count;
  result.folded_faces = std::move(folds.faces);
  result.folds_after = result.folds_before;
  if (result.folds_before > 0 || cfg.force_correct) {
    result.map = correct_overlaps(prep.solve_mesh, result.map, segments);
    result.folds_after = count_folded(prep.solve_mesh, result.map).count;
    result.corrected = true;
    TrajectoryRow row = result.solve.trajectory.back();
    row.iter += 1;
    row.phase = 'B';
    row.e_s = stretch_energy(prep.solve_mesh, result.map, rho);
    row.e_a = authalic_energy(prep.solve_mesh, result.map);
    row.area = image_area(prep.solve_mesh, result.map);
    RatioStats st = ratio_statistics(prep.solve_mesh, result.map);
    row.weighted_var = st.weighted_variance;
    row.unweighted_var = st.unweighted_variance;
    row.r_mean = st.r_area_mean;
    row.r_sd = st.r_area_sd;
    row.folds = result.folds_after;
    row.alpha = 0.0;
    row.armijo_ok = -1;
    row.wolfe_curvature = -1;
    result.solve.trajectory.push_back(row);
  }
  result.stats = ratio_statistics(prep.solve_mesh, result.map);

  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (!cfg.out_obj.empty()) {
    prep.sliced.mesh.save_obj(cfg.out_obj, &result.map.u, &result.map.v);
  }
  if (!cfg.out_flat_obj.empty()) {
    prep.sliced.mesh.save_obj(cfg.out_flat_obj, &result.map.u, &result.map.v,
                              /*flatten_positions=*/true);
  }
  if (!cfg.report_csv.empty()) {
    write_trajectory_csv(cfg.report_csv, result.solve.trajectory);
  }
  if (!cfg.summary_json.empty()) {
    std::ofstream out(cfg.summary_json);
    if (!out) throw Error("cannot write " + cfg.summary_json);
    out << summary_json(cfg, input, result) << "\n";
  }
  return result;
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "iter,phase,E_S,E_A,area,weighted_var,unweighted_var,"
         "R_area_mean,R_area_SD,folds,alpha,armijo,wolfe_curvature\n";
  for (const TrajectoryRow& r : rows) {
    out << r.iter << ',' << r.phase << ',' << fmt(r.e_s) << ',' << fmt(r.e_a)
        << ',' << fmt(r.area) << ',' << fmt(r.weighted_var) << ','
        << fmt(r.unweighted_var) << ',' << fmt(r.r_mean) << ','
        << fmt(r.r_sd) << ',' << r.folds << ',' << fmt(r.alpha) << ','
        << r.armijo_ok << ',' << r.wolfe_curvature << '\n';
  }
  if (!out) throw Error("write failure on " + path);
}

std::string summary_json(const PipelineConfig& cfg, const TriMesh& input,
                         const PipelineResult& result) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model_name.empty() ? stem_of(cfg.input) : cfg.model_name;
  j["vertices"] = input.vertex_count();
  j["faces"] = input.face_count();
  j["genus"] = cfg.genus;
  j["rho"] = cfg.rho_mode;
  if (cfg.timing) {
    j["time_secs"] = result.elapsed_seconds;
  } else {
    j["time_secs"] = nullptr;  // kept out of the artifact for determinism
  }
  j["E_A"] = result.solve.trajectory.back().e_a;
  j["E_S"] = result.solve.trajectory.back().e_s;
  j["area"] = result.solve.trajectory.back().area;
  j["R_area_mean"] = result.stats.r_area_mean;
  j["R_area_SD"] = result.stats.r_area_sd;
  j["foldings_before"] = result.folds_before;
  j["foldings_after"] = result.folds_after;
  j["folded_faces"] = result.folded_faces;
  j["iterations"] = result.solve.cg_iterations;
  j["fpm_iterations"] = cfg.solver.fpm_iters;
  std::string stopped = "max_iters";
  if (result.solve.aborted_nonfinite) stopped = "nonfinite";
  else if (result.solve.stopped_on_energy) stopped = "energy_deficit";
  else if (result.solve.stopped_on_gradient) stopped = "gradient_norm";
  j["stopped_on"] = stopped;
  j["linesearch_failures"] = result.solve.linesearch_failures;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

}  // namespace sqm
