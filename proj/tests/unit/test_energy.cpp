#include "squaremap/energy.hpp"
#include "squaremap/generators.hpp"

#include "../support/test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sqm;

namespace {

ParamMap identity_map(const TriMesh& mesh) {
  ParamMap f;
  f.u.resize(mesh.vertex_count());
  f.v.resize(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    f.u[i] = mesh.vertex(i).x();
    f.v[i] = mesh.vertex(i).y();
  }
  return f;
}

double max_abs(const SparseMat& m) {
  return m.nonZeros() ? m.coeffs().cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

TEST_SUITE_BEGIN("energy");

TEST_CASE("stretch laplacian of a flat equilateral triangle") {
  const double h = std::sqrt(3.0) / 2.0;
  std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}};
  TriMesh mesh(std::move(v), {{0, 1, 2}});
  ParamMap f = identity_map(mesh);
  auto sl = stretch_laplacian(mesh, f, AreaMeasure::face_areas(mesh));
  CHECK(sl.clamped_faces.empty());
  // cot(60 deg) / 2 = 1 / (2 sqrt 3)
  const double expect = -1.0 / (2.0 * std::sqrt(3.0));
  CHECK(sl.L.coeff(0, 1) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(sl.L.coeff(1, 2) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(sl.L.coeff(0, 0) == doctest::Approx(-2 * expect).epsilon(1e-12));
}

TEST_CASE("identity map reduces to the cotangent laplacian") {
  TriMesh grid = make_flat_grid(4);
  const AreaMeasure rho = AreaMeasure::face_areas(grid);
  auto sl = stretch_laplacian(grid, identity_map(grid), rho);
  SparseMat classic = stretch_laplacian_identity(grid, rho);
  CHECK(max_abs(sl.L - classic) < 1e-12);
}

TEST_CASE("laplacian scales with the squared image scale") {
  TriMesh grid = make_flat_grid(3);
  std::mt19937 rng(11);
  ParamMap f = test_support::random_map(grid.vertex_count(), rng);
  const AreaMeasure rho = AreaMeasure::face_areas(grid);
  auto l1 = stretch_laplacian(grid, f, rho);
  ParamMap f2 = f;
  f2.u *= 2.0;
  f2.v *= 2.0;
  auto l2 = stretch_laplacian(grid, f2, rho);
  CHECK(max_abs(l2.L - SparseMat(4.0 * l1.L)) < 1e-10);
}

TEST_CASE("laplacian rows sum to zero") {
  TriMesh grid = make_flat_grid(5);
  std::mt19937 rng(3);
  ParamMap f = test_support::random_map(grid.vertex_count(), rng);
  auto sl = stretch_laplacian(grid, f, AreaMeasure::face_areas(grid));
  Eigen::VectorXd rowsum = sl.L * Eigen::VectorXd::Ones(grid.vertex_count());
  const double scale = max_abs(sl.L);
  CHECK(rowsum.cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0));
}

TEST_CASE("stretch energy values") {
  SUBCASE("identity of a flat unit-area mesh") {
    TriMesh grid = make_flat_grid(4);
    CHECK(stretch_energy(grid, identity_map(grid),
                         AreaMeasure::face_areas(grid)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("single triangle, direct formula") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 0.5, 0}};
    TriMesh mesh(std::move(v), {{0, 1, 2}});  // source area 0.25
    ParamMap f;
    f.u.resize(3);
    f.v.resize(3);
    f.u << 0, 1, 0;
    f.v << 0, 0, 1;  // image area 0.5
    AreaMeasure rho;
    rho.rho = Eigen::VectorXd::Constant(1, 0.25);
    CHECK(stretch_energy(mesh, f, rho) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("direct sum equals the quadratic form") {
    TriMesh grid = make_flat_grid(6);
    std::mt19937 rng(17);
    const AreaMeasure rho = AreaMeasure::face_areas(grid);
    for (int trial = 0; trial < 5; ++trial) {
      ParamMap f = test_support::random_map(grid.vertex_count(), rng);
      const double direct = stretch_energy(grid, f, rho);
      auto sl = stretch_laplacian(grid, f, rho);
      const double quad = 0.5 * (f.u.dot(sl.L * f.u) + f.v.dot(sl.L * f.v));
      CHECK(quad == doctest::Approx(direct).epsilon(1e-10));
    }
  }
}

TEST_CASE("image area") {
  SUBCASE("single triangle") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    TriMesh mesh(std::move(v), {{0, 1, 2}});
    CHECK(image_area(mesh, identity_map(mesh)) ==
          doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("identity covers the unit square") {
    TriMesh grid = make_flat_grid(4);
    CHECK(image_area(grid, identity_map(grid)) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("a fold counts unsigned") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    TriMesh mesh(std::move(v), {{0, 1, 2}, {0, 2, 3}});
    ParamMap f;
    f.u.resize(4);
    f.v.resize(4);
    // Fold the second triangle exactly onto the first.
    f.u << 0, 1, 1, 1;
    f.v << 0, 0, 1, 0;
    CHECK(image_area(mesh, f) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("authalic energy") {
  SUBCASE("area preserving map has zero energy") {
    TriMesh grid = make_flat_grid(5);
    CHECK(std::abs(authalic_energy(grid, identity_map(grid))) <= 1e-12);
  }
  SUBCASE("hand-computed two-face value") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    TriMesh mesh(std::move(v), {{0, 1, 2}, {1, 3, 2}});
    ParamMap f;
    f.u.resize(4);
    f.v.resize(4);
    // Image areas 0.75 and 0.25, total 1.
    f.u << 0, 1.5, 0, 1;
    f.v << 0, 0, 1, 2.0 / 3.0;
    CHECK(image_area(mesh, f) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(stretch_energy(mesh, f, AreaMeasure::face_areas(mesh)) ==
          doctest::Approx(1.25).epsilon(1e-12));
    CHECK(authalic_energy(mesh, f) == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("nonnegative on random maps") {
    TriMesh grid = make_flat_grid(6);
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
      ParamMap f = test_support::random_map(grid.vertex_count(), rng);
      CHECK(authalic_energy(grid, f) >= -1e-12);
    }
  }
}

TEST_CASE("ratio statistics identities") {
  TriMesh grid = make_flat_grid(6);
  std::mt19937 rng(31);
  SUBCASE("area preserving map") {
    RatioStats st = ratio_statistics(grid, identity_map(grid));
    CHECK(st.r_area_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.r_area_sd <= 1e-9);
    CHECK(st.weighted_variance <= 1e-12);
  }
  SUBCASE("weighted variance equals (A/|M|^2) E_A") {
    for (int trial = 0; trial < 25; ++trial) {
      ParamMap f = test_support::random_map(grid.vertex_count(), rng);
      const double e_a = authalic_energy(grid, f);
      const double area = image_area(grid, f);
      const double total = grid.total_area();
      RatioStats st = ratio_statistics(grid, f);
      CHECK(std::abs(st.weighted_variance - area / (total * total) * e_a) <=
            1e-10 * std::max(1.0, e_a));
    }
  }
  SUBCASE("unweighted variance respects the bound") {
    for (int trial = 0; trial < 25; ++trial) {
      ParamMap f = test_support::random_map(grid.vertex_count(), rng);
      RatioStats st = ratio_statistics(grid, f);
      CHECK(st.unweighted_variance <=
            st.variance_bound * (1.0 + 1e-9) + 1e-15);
    }
  }
}

TEST_CASE("free layout expansion") {
  TriMesh grid = make_flat_grid(4);
  BoundarySegments seg = flat_grid_segments(4);
  FreeLayout layout(grid, seg);
  CHECK(layout.free_size() ==
        2 * 9 + 3 + 3);  // 9 interior, |E|-2 = |F|-2 = 3

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Eigen::VectorXd x(layout.free_size());
  for (int i = 0; i < x.size(); ++i) x[i] = uni(rng);

  ParamMap f = layout.expand(x);
  SUBCASE("restrict inverts expand") {
    Eigen::VectorXd back = layout.restrict(f);
    CHECK((back - x).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("corners pinned") {
    CHECK(f.u[seg.corners[0]] == 0.0);
    CHECK(f.v[seg.corners[0]] == 0.0);
    CHECK(f.u[seg.corners[1]] == 1.0);
    CHECK(f.v[seg.corners[1]] == 0.0);
    CHECK(f.u[seg.corners[2]] == 1.0);
    CHECK(f.v[seg.corners[2]] == 1.0);
    CHECK(f.u[seg.corners[3]] == 0.0);
    CHECK(f.v[seg.corners[3]] == 1.0);
  }
  SUBCASE("identified segments mirror") {
    for (size_t t = 0; t < seg.E.size(); ++t) {
      CHECK(f.v[seg.E[t]] == 0.0);
      CHECK(f.u[seg.H[t]] == 0.0);
      CHECK(f.u[seg.E[t]] == f.v[seg.H[t]]);
    }
    for (size_t t = 0; t < seg.F.size(); ++t) {
      CHECK(f.u[seg.F[t]] == 1.0);
      CHECK(f.v[seg.G[t]] == 1.0);
      CHECK(f.v[seg.F[t]] == f.u[seg.G[t]]);
    }
  }
  SUBCASE("constraint check accepts and rejects") {
    CHECK_NOTHROW(layout.check_constraints(f));
    ParamMap bad = f;
    bad.v[seg.H[1]] += 1e-6;
    CHECK_THROWS_AS(layout.check_constraints(bad), Error);
  }
}

TEST_CASE("gradient matches finite differences") {
  TriMesh grid = make_flat_grid(5);
  BoundarySegments seg = flat_grid_segments(5);
  FreeLayout layout(grid, seg);
  const AreaMeasure rho = AreaMeasure::face_areas(grid);

  // Perturbed identity keeps triangles healthy, away from any clamping.
  Eigen::VectorXd x = layout.restrict(identity_map(grid));
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> uni(-0.02, 0.02);
  for (int i = 0; i < x.size(); ++i) x[i] += uni(rng);

  ParamMap f = layout.expand(x);
  std::vector<int> clamped;
  Eigen::VectorXd g = stretch_gradient(grid, f, rho, layout, &clamped);
  CHECK(clamped.empty());

  std::uniform_int_distribution<int> pick(0, layout.free_size() - 1);
  for (int trial = 0; trial < 10; ++trial) {
    const int coord = pick(rng);
    const double fd =
        test_support::fd_gradient_entry(grid, layout, rho, x, coord);
    CHECK(g[coord] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gradient equals the matrix product route") {
  TriMesh grid = make_flat_grid(4);
  BoundarySegments seg = flat_grid_segments(4);
  FreeLayout layout(grid, seg);
  const AreaMeasure rho = AreaMeasure::face_areas(grid);
  std::mt19937 rng(43);
  Eigen::VectorXd x = layout.restrict(identity_map(grid));
  std::uniform_real_distribution<double> uni(-0.02, 0.02);
  for (int i = 0; i < x.size(); ++i) x[i] += uni(rng);
  ParamMap f = layout.expand(x);

  Eigen::VectorXd g = stretch_gradient(grid, f, rho, layout);
  auto sl = stretch_laplacian(grid, f, rho);
  Eigen::VectorXd manual =
      layout.reduce_gradient(2.0 * (sl.L * f.u), 2.0 * (sl.L * f.v));
  CHECK((g - manual).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gradient rejects constraint violations") {
  TriMesh grid = make_flat_grid(4);
  BoundarySegments seg = flat_grid_segments(4);
  FreeLayout layout(grid, seg);
  ParamMap f = layout.expand(layout.restrict(identity_map(grid)));
  f.v[seg.H[1]] += 1e-6;
  CHECK_THROWS_AS(
      stretch_gradient(grid, f, AreaMeasure::face_areas(grid), layout), Error);
}

TEST_SUITE_END();
