#pragma once

#include "squaremap/bijectivity.hpp"
#include "squaremap/geometry_image.hpp"
#include "squaremap/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace sqm {

/// Slicing + normalization shared by the parameterization pipelines.
/// `sliced` keeps the input coordinate scale; `solve_mesh` is the same
/// connectivity scaled to unit total area (scale holds the factor).
struct PreparedMesh {
  SlicedMesh sliced;
  TriMesh solve_mesh;
  double scale = 1.0;
};

PreparedMesh prepare_mesh(const TriMesh& mesh, int genus,
                          const CutPath* loop_a = nullptr,
                          const CutPath* loop_b = nullptr);

struct PipelineConfig {
  std::string input;
  std::string model_name;
  int genus = 0;
  std::string loops_path;     // required for genus 1
  std::string rho_mode = "area";  // "area" or "const"
  SolverConfig solver;
  std::string out_obj;
  std::string out_flat_obj;   // optional: positions flattened to (u, v, 0)
  std::string report_csv;
  std::string summary_json;
  uint64_t seed = 0;
  int threads = 1;
  bool force_correct = false; // run the overlap correction unconditionally
  bool timing = false;        // include wall time in the summary
};

struct PipelineResult {
  ParamMap map;               // on the sliced mesh, unit-area scale
  RatioStats stats;
  SolveResult solve;
  int folds_before = 0;
  int folds_after = 0;
  std::vector<int> folded_faces;  // before correction
  bool corrected = false;
  double elapsed_seconds = 0.0;
};

/// slice -> fixed-point + preconditioned CG -> overlap correction (when
/// folds remain) -> artifacts (map OBJ, trajectory CSV, summary JSON).
PipelineResult run_pipeline(const PipelineConfig& cfg);

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectoryRow>& rows);

std::string summary_json(const PipelineConfig& cfg, const TriMesh& input,
                         const PipelineResult& result);

}  // namespace sqm
