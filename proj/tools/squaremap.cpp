// Command-line driver: slicing, square area-preserving parameterization,
// overlap correction, geometry image encode/decode, and mesh generators.

#include "squaremap/generators.hpp"
#include "squaremap/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

int fail(const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = message;
  std::cout << j.dump() << std::endl;
  return code;
}

// "--out img.png" or "--out img.png,img.json".
std::pair<std::string, std::string> split_image_out(const std::string& out) {
  const size_t comma = out.find(',');
  if (comma != std::string::npos) {
    return {out.substr(0, comma), out.substr(comma + 1)};
  }
  const size_t dot = out.find_last_of('.');
  const std::string base = dot == std::string::npos ? out : out.substr(0, dot);
  return {out, base + ".json"};
}

void write_loops_file(const std::string& path, const sqm::CutPath& a,
                      const sqm::CutPath& b) {
  std::ofstream out(path);
  if (!out) throw sqm::Error("cannot write " + path);
  for (size_t i = 0; i < a.vertices.size(); ++i) {
    out << (i ? " " : "") << a.vertices[i];
  }
  out << "\n";
  for (size_t i = 0; i < b.vertices.size(); ++i) {
    out << (i ? " " : "") << b.vertices[i];
  }
  out << "\n";
}

sqm::ParamMap map_from_obj(const sqm::TriMesh& mesh) {
  if (mesh.texcoords().empty()) {
    throw sqm::Error("map OBJ must carry per-vertex texture coordinates");
  }
  sqm::ParamMap f;
  f.u.resize(mesh.vertex_count());
  f.v.resize(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    f.u[i] = mesh.texcoords()[i].x();
    f.v[i] = mesh.texcoords()[i].y();
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Square-domain area-preserving parameterization and geometry images"};
  app.require_subcommand(1);

  // ---- param ----
  auto* param = app.add_subcommand(
      "param", "Slice a closed mesh and compute the square parameterization");
  sqm::PipelineConfig pcfg;
  int param_threads = 1;
  param->add_option("--input", pcfg.input, "Closed triangle mesh (OBJ)")
      ->required();
  param->add_option("--genus", pcfg.genus, "Surface genus (0 or 1)")
      ->required()
      ->check(CLI::Range(0, 1));
  param->add_option("--loops", pcfg.loops_path,
                    "Loop sidecar file (two lines of 0-based indices)");
  param->add_option("--rho", pcfg.rho_mode, "Energy measure: area or const")
      ->check(CLI::IsMember({"area", "const"}))
      ->default_val("area");
  param->add_option("--max-iters", pcfg.solver.max_iters, "CG iteration cap");
  param->add_option("--tol", pcfg.solver.energy_tol, "Energy deficit tolerance");
  param->add_option("--grad-tol", pcfg.solver.grad_tol, "Gradient norm tolerance");
  param->add_option("--fpm-iters", pcfg.solver.fpm_iters,
                    "Fixed-point rounds after the harmonic solve");
  param->add_option("--out", pcfg.out_obj, "Output OBJ (positions + vt)");
  param->add_option("--out-flat", pcfg.out_flat_obj,
                    "Output OBJ with positions flattened to (u, v, 0)");
  param->add_option("--report", pcfg.report_csv, "Per-iteration trajectory CSV");
  param->add_option("--summary", pcfg.summary_json, "Summary JSON");
  param->add_option("--name", pcfg.model_name, "Model name for the summary");
  param->add_option("--seed", pcfg.seed, "Seed recorded in the summary");
  param->add_option("--threads", param_threads, "Worker threads");
  param->add_flag("--force-correct", pcfg.force_correct,
                  "Run the overlap correction even without folds");
  param->add_flag("--timing", pcfg.timing, "Include wall time in the summary");

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "Built-in mesh generators");
  gen->require_subcommand(1);

  auto* gen_ico = gen->add_subcommand("icosphere", "Subdivided icosahedron");
  int ico_subdiv = 3;
  double ico_radius = 1.0;
  std::string ico_out;
  gen_ico->add_option("--subdiv", ico_subdiv, "Subdivision level")->required();
  gen_ico->add_option("--radius", ico_radius, "Sphere radius");
  gen_ico->add_option("--out", ico_out, "Output OBJ")->required();

  auto* gen_torus = gen->add_subcommand("torus", "Structured torus grid");
  int torus_nu = 24, torus_nv = 24;
  double torus_R = 2.0, torus_r = 1.0;
  std::string torus_out, torus_loops_out;
  gen_torus->add_option("--nu", torus_nu, "Major-circle resolution")->required();
  gen_torus->add_option("--nv", torus_nv, "Tube resolution")->required();
  gen_torus->add_option("--major-radius", torus_R, "Major radius");
  gen_torus->add_option("--minor-radius", torus_r, "Minor (tube) radius");
  gen_torus->add_option("--out", torus_out, "Output OBJ")->required();
  gen_torus->add_option("--loops-out", torus_loops_out,
                        "Write the canonical cut loops sidecar");

  // ---- gimg ----
  auto* gimg = app.add_subcommand("gimg", "Geometry images");
  gimg->require_subcommand(1);

  auto* genc = gimg->add_subcommand("encode", "Sample a parameterized mesh");
  std::string enc_map, enc_out;
  int enc_n = 200, enc_genus = 0, enc_threads = 1;
  bool enc_f32 = false;
  genc->add_option("--map", enc_map, "Parameterized mesh OBJ (v + vt)")
      ->required();
  genc->add_option("--n", enc_n, "Image resolution")->required();
  genc->add_option("--genus", enc_genus, "Genus tag for seam welding")
      ->check(CLI::Range(0, 1));
  genc->add_option("--out", enc_out, "img.png or img.png,img.json")->required();
  genc->add_option("--threads", enc_threads, "Worker threads");
  genc->add_flag("--float32", enc_f32, "Write the lossless float container");

  auto* gdec = gimg->add_subcommand("decode", "Rebuild a mesh from an image");
  std::string dec_in, dec_out;
  bool dec_f32 = false;
  gdec->add_option("--in", dec_in, "img.png (sidecar img.json expected)")
      ->required();
  gdec->add_option("--out", dec_out, "Output OBJ")->required();
  gdec->add_flag("--float32", dec_f32, "Read the lossless float container");

  auto* gcor = gimg->add_subcommand(
      "correct", "Constant-area map with angular correction, then encode");
  sqm::PipelineConfig ccfg;
  std::string cor_out, cor_map_out;
  int cor_n = 200;
  double cor_delta = 0.8;
  gcor->add_option("--input", ccfg.input, "Closed triangle mesh (OBJ)")
      ->required();
  gcor->add_option("--genus", ccfg.genus, "Surface genus (0 or 1)")
      ->required()
      ->check(CLI::Range(0, 1));
  gcor->add_option("--loops", ccfg.loops_path, "Loop sidecar file");
  gcor->add_option("--n", cor_n, "Image resolution");
  gcor->add_option("--delta", cor_delta, "Beltrami truncation threshold");
  gcor->add_option("--out", cor_out, "img.png or img.png,img.json")->required();
  gcor->add_option("--map-out", cor_map_out, "Corrected map OBJ");
  gcor->add_option("--max-iters", ccfg.solver.max_iters, "CG iteration cap");
  gcor->add_option("--tol", ccfg.solver.energy_tol, "Energy deficit tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*param) {
      if (pcfg.genus == 1 && pcfg.loops_path.empty()) {
        return fail("loops file required", 2);
      }
      pcfg.threads = param_threads;
      sqm::PipelineResult result = sqm::run_pipeline(pcfg);
      std::fprintf(stderr,
                   "param: E_A=%.6g R_SD=%.6g folds %d -> %d, %d CG iters, %.2fs\n",
                   result.solve.trajectory.back().e_a, result.stats.r_area_sd,
                   result.folds_before, result.folds_after,
                   result.solve.cg_iterations, result.elapsed_seconds);
      return 0;
    }

    if (*gen_ico) {
      sqm::make_icosphere(ico_subdiv, ico_radius).save_obj(ico_out);
      return 0;
    }
    if (*gen_torus) {
      sqm::make_torus(torus_nu, torus_nv, torus_R, torus_r).save_obj(torus_out);
      if (!torus_loops_out.empty()) {
        auto [la, lb] = sqm::canonical_torus_loops(torus_nu, torus_nv);
        write_loops_file(torus_loops_out, la, lb);
      }
      return 0;
    }

    if (*genc) {
      sqm::TriMesh mesh = sqm::TriMesh::load_obj(enc_map);
      sqm::ParamMap f = map_from_obj(mesh);
      const int folds = sqm::count_folded(mesh, f).count;
      if (folds > 0) {
        return fail("map has " + std::to_string(folds) +
                        " folded faces; encode requires a bijective map",
                    1);
      }
      sqm::GeometryImage img =
          sqm::encode(mesh, f, enc_n, enc_genus, enc_threads);
      if (enc_f32) {
        sqm::save_geometry_image_f32(img, enc_out);
      } else {
        auto [png, json] = split_image_out(enc_out);
        sqm::save_geometry_image(img, png, json);
      }
      std::fprintf(stderr, "encode: n=%d fallback_pixels=%d\n", img.n,
                   img.fallback_pixels);
      return 0;
    }

    if (*gdec) {
      sqm::GeometryImage img;
      if (dec_f32) {
        img = sqm::load_geometry_image_f32(dec_in);
      } else {
        auto [png, json] = split_image_out(dec_in);
        img = sqm::load_geometry_image(png, json);
      }
      sqm::DecodeResult res = sqm::decode(img);
      res.mesh.save_obj(dec_out);
      if (!res.welded) {
        std::fprintf(stderr,
                     "decode: seam mismatch %.3g above tolerance, emitted open\n",
                     res.max_weld_error);
      }
      return 0;
    }

    if (*gcor) {
      if (ccfg.genus == 1 && ccfg.loops_path.empty()) {
        return fail("loops file required", 2);
      }
      sqm::TriMesh input = sqm::TriMesh::load_obj(ccfg.input);
      sqm::CutPath la, lb;
      const sqm::CutPath* pa = nullptr;
      const sqm::CutPath* pb = nullptr;
      if (ccfg.genus == 1) {
        std::tie(la, lb) = sqm::load_loops(ccfg.loops_path);
        pa = &la;
        pb = &lb;
      }
      sqm::PreparedMesh prep = sqm::prepare_mesh(input, ccfg.genus, pa, pb);
      const sqm::BoundarySegments& seg = *prep.sliced.segments;

      sqm::SolveResult solve =
          sqm::constant_area_param(prep.solve_mesh, seg, ccfg.solver);

      sqm::BeltramiField mu =
          sqm::beltrami_coefficient(prep.solve_mesh, solve.harmonic, solve.map);
      sqm::ParamMap corrected = sqm::truncate_and_reconstruct(
          prep.solve_mesh, solve.harmonic, mu, cor_delta, seg);
      if (sqm::count_folded(prep.solve_mesh, corrected).count > 0) {
        corrected = sqm::correct_overlaps(prep.solve_mesh, corrected, seg);
      }

      sqm::GeometryImage img =
          sqm::encode(prep.sliced.mesh, corrected, cor_n, ccfg.genus);
      auto [png, json] = split_image_out(cor_out);
      sqm::save_geometry_image(img, png, json);
      if (!cor_map_out.empty()) {
        prep.sliced.mesh.save_obj(cor_map_out, &corrected.u, &corrected.v);
      }
      std::fprintf(stderr, "correct: n=%d fallback_pixels=%d\n", img.n,
                   img.fallback_pixels);
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e.what(), 1);
  }
  return 0;
}
