#include <doctest.h>

#include <random>

#include "rrmfem/spaces.hpp"

using namespace rrm;

namespace {

RectGrid unit_grid(int m, int n) { return build_uniform(m, n, Domain::unit_square()); }

// fixed nonuniform grid for pattern checks
RectGrid skew_grid(int m, int n) {
  RectGrid g;
  g.m = m;
  g.n = n;
  g.xs.resize(m + 1);
  g.ys.resize(n + 1);
  for (int i = 0; i <= m; ++i) g.xs[i] = std::pow((double)i / m, 1.3);
  for (int j = 0; j <= n; ++j) g.ys[j] = std::pow((double)j / n, 0.8) * 2.0;
  g.active.assign(m * n, 1);
  return g;
}

Eigen::VectorXd interpolate_wilson(const RectGrid& g, const DofMap& map,
                                   const ScalarField& u, const ScalarField& uxx,
                                   const ScalarField& uyy) {
  // vertex values plus bubble coefficients matching the mean second
  // derivatives: p = sum u(a_i) phi_i - (uxx/2) phi_xx - (uyy/2) phi_yy for
  // quadratic u with constant second derivatives
  Eigen::VectorXd c = Eigen::VectorXd::Zero(map.n_free);
  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i <= g.m; ++i) {
      const int dof = map.vertex_dof[i + j * (g.m + 1)];
      if (dof >= 0) c(dof) = u(g.xs[i], g.ys[j]);
    }
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      const int dof = map.cell_dof[g.cell_id(i, j)];
      if (dof < 0) continue;
      const CellGeom geom = cell_geom(g, i, j);
      c(dof) = -0.5 * uxx(geom.xc(), geom.yc());
      c(dof + 1) = -0.5 * uyy(geom.xc(), geom.yc());
    }
  return c;
}

}  // namespace

TEST_CASE("dof counts") {
  for (int m = 1; m <= 6; ++m)
    for (int n = 1; n <= 6; ++n) {
      const RectGrid g = unit_grid(m, n);
      CHECK(build_dof_map(SpaceKind::Wilson, g, true).n_free == (m - 1) * (n - 1) + 2 * m * n);
      const EntityIndex idx(g);
      CHECK(build_dof_map(SpaceKind::RM, g, true).n_free ==
            (m - 1) * (n - 1) + idx.count_edges());
      CHECK(build_dof_map(SpaceKind::Q1, g, true).n_free == (m - 1) * (n - 1));
      CHECK(build_dof_map(SpaceKind::WilsonBroken, g, false).n_free == 6 * m * n);
    }
}

TEST_CASE("constraint matrix shape and rank") {
  {
    const RectGrid g = unit_grid(1, 1);
    const auto B = build_constraints_rrm(g, build_dof_map(SpaceKind::Wilson, g, true));
    CHECK(B.B.rows() == 0);
  }
  {
    const RectGrid g = unit_grid(2, 2);
    const auto B = build_constraints_rrm(g, build_dof_map(SpaceKind::Wilson, g, true));
    CHECK(B.B.rows() == 4);
    CHECK(numerical_rank(Eigen::MatrixXd(B.B)) == 4);
  }
}

TEST_CASE("constraint rows annihilate interpolated smooth quadratics") {
  const ScalarField u = [](double x, double y) { return 1 + 2 * x - y + x * x + 3 * x * y + y * y; };
  const ScalarField uxx = [](double, double) { return 2.0; };
  const ScalarField uyy = [](double, double) { return 2.0; };
  for (const RectGrid& g : {unit_grid(3, 4), skew_grid(4, 3)}) {
    const DofMap full = build_dof_map(SpaceKind::Wilson, g, false);
    const auto B = build_constraints_rrm(g, full);
    const Eigen::VectorXd c = interpolate_wilson(g, full, u, uxx, uyy);
    CHECK((B.B * c).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("RRM basis counts") {
  CHECK(build_rrm_basis(unit_grid(3, 3)).count() == 10);
  CHECK(build_rrm_basis(unit_grid(2, 2)).count() == 5);
  CHECK_THROWS_AS(build_rrm_basis(unit_grid(1, 3)), PreconditionError);
  CHECK_THROWS_AS(build_rrm_basis(build_uniform(4, 4, Domain::lshape())), PreconditionError);
}

TEST_CASE("dimension sweep and kernel identity") {
  for (int m = 2; m <= 6; ++m)
    for (int n = 2; n <= 6; ++n) {
      const RectGrid g = unit_grid(m, n);
      const ExplicitBasis basis = build_rrm_basis(g);
      CHECK(basis.count() == m * n + 1);
      const auto B = build_constraints_rrm(g, basis.map);
      CHECK((int)B.B.rows() == 2 * m * n - m - n);
      const int rank = numerical_rank(Eigen::MatrixXd(B.B));
      CHECK(rank == 2 * m * n - m - n);
      CHECK(basis.map.n_free - rank == m * n + 1);
      // linear independence
      CHECK(numerical_rank(Eigen::MatrixXd(basis.matrix())) == basis.count());
      // membership of every member
      for (const auto& v : basis.members) CHECK(membership_rrm(B, dense_coeffs(v.coeffs)));
    }
}

TEST_CASE("basis spans the constraint kernel") {
  for (const RectGrid& g : {unit_grid(3, 4), skew_grid(3, 3)}) {
    const ExplicitBasis basis = build_rrm_basis(g);
    const auto B = build_constraints_rrm(g, basis.map);
    const Eigen::MatrixXd Bd(B.B);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bd, Eigen::ComputeFullV);
    const int rank = numerical_rank(Bd);
    const Eigen::MatrixXd kernel = svd.matrixV().rightCols(basis.map.n_free - rank);
    const Eigen::MatrixXd Z(basis.matrix());
    // project each kernel vector onto span(Z); the residual must vanish
    const Eigen::MatrixXd coeffs = Z.colPivHouseholderQr().solve(kernel);
    CHECK((Z * coeffs - kernel).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("column pattern alternates edge derivative means") {
  const RectGrid g = unit_grid(4, 5);
  const ExplicitBasis basis = build_rrm_basis(g);
  for (const auto& member : basis.members) {
    if (member.kind != PatternKind::Column) continue;
    const int i = member.i - 1;  // 0-based column
    const auto cells = expand_to_cells(g, basis.map, dense_coeffs(member.coeffs));
    std::vector<double> means;
    for (int j = 0; j <= g.n; ++j) {
      // d/dy mean on the horizontal edge at level j, taken from the cell side
      const bool top = (j == g.n);
      const LocalQuad& cell = cells[g.cell_id(i, top ? g.n - 1 : j)];
      means.push_back(edge_mean_coordinate_derivative(cell, top ? CellSide::Top : CellSide::Bottom));
    }
    for (size_t l = 0; l + 1 < means.size(); ++l)
      CHECK(means[l] == doctest::Approx(-means[l + 1]).epsilon(1e-10));
    CHECK(std::abs(means[0]) > 1e-6);
  }
}

TEST_CASE("membership rejects a Wilson bubble and accepts zero") {
  const RectGrid g = unit_grid(3, 3);
  const DofMap wilson = build_dof_map(SpaceKind::Wilson, g, true);
  const auto B = build_constraints_rrm(g, wilson);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(wilson.n_free);
  CHECK(membership_rrm(B, c));
  c(wilson.cell_dof[g.cell_id(1, 1)]) = 1.0;  // interior cell xx-bubble
  CHECK_FALSE(membership_rrm(B, c));
  CHECK_THROWS_AS(membership_rrm(B, Eigen::VectorXd::Zero(3)), PreconditionError);
}

TEST_CASE("MC basis dimensions") {
  CHECK(build_mc_basis(unit_grid(2, 2), true).count() == 5);
  CHECK(build_mc_basis(unit_grid(1, 1), false).count() == 6);
  for (int m = 1; m <= 6; ++m)
    for (int n = 1; n <= 6; ++n) {
      const RectGrid g = unit_grid(m, n);
      const ExplicitBasis hom = build_mc_basis(g, true);
      const ExplicitBasis full = build_mc_basis(g, false);
      CHECK(hom.count() == 2 * m * n - m - n + 1);
      CHECK(full.count() == 2 * m * n + 2 * m + 2 * n);
      CHECK(numerical_rank(Eigen::MatrixXd(hom.matrix())) == hom.count());
      CHECK(numerical_rank(Eigen::MatrixXd(full.matrix())) == full.count());
    }
}

TEST_CASE("MC members are continuous at interior-edge Gauss points") {
  for (const RectGrid& g : {unit_grid(3, 2), skew_grid(2, 3)}) {
    const EntityIndex idx(g);
    for (bool hom : {true, false}) {
      const ExplicitBasis basis = build_mc_basis(g, hom);
      for (const auto& member : basis.members) {
        const auto cells = expand_to_cells(g, basis.map, dense_coeffs(member.coeffs));
        double worst = 0.0;
        for (int j = 0; j <= g.n; ++j)
          for (int i = 0; i < g.m; ++i)
            if (idx.hedge_interior[idx.hedge_id(i, j)]) {
              const auto pts = edge_gauss_points(cell_geom(g, i, j), CellSide::Bottom);
              for (const auto& p : pts)
                worst = std::max(worst, std::abs(cells[g.cell_id(i, j)].eval(p.x(), p.y()) -
                                                 cells[g.cell_id(i, j - 1)].eval(p.x(), p.y())));
            }
        for (int j = 0; j < g.n; ++j)
          for (int i = 0; i <= g.m; ++i)
            if (idx.vedge_interior[idx.vedge_id(i, j)]) {
              const auto pts = edge_gauss_points(cell_geom(g, i, j), CellSide::Left);
              for (const auto& p : pts)
                worst = std::max(worst, std::abs(cells[g.cell_id(i, j)].eval(p.x(), p.y()) -
                                                 cells[g.cell_id(i - 1, j)].eval(p.x(), p.y())));
            }
        CHECK(worst < 1e-10);
        // homogeneous members also vanish at boundary-edge Gauss points
        if (hom) {
          double bmax = 0.0;
          for (int j = 0; j < g.n; ++j)
            for (int i = 0; i < g.m; ++i) {
              const CellGeom geom = cell_geom(g, i, j);
              for (CellSide s :
                   {CellSide::Bottom, CellSide::Right, CellSide::Top, CellSide::Left}) {
                const bool boundary =
                    (s == CellSide::Bottom && j == 0) || (s == CellSide::Top && j == g.n - 1) ||
                    (s == CellSide::Left && i == 0) || (s == CellSide::Right && i == g.m - 1);
                if (!boundary) continue;
                for (const auto& p : edge_gauss_points(geom, s))
                  bmax = std::max(bmax, std::abs(cells[g.cell_id(i, j)].eval(p.x(), p.y())));
              }
            }
          CHECK(bmax < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("exact sequence holds for RRM basis vectors") {
  for (const RectGrid& g : {unit_grid(3, 3), skew_grid(4, 3)}) {
    const ExplicitBasis basis = build_rrm_basis(g);
    const auto rep = verify_exact_sequence(basis, g);
    CHECK(rep.max_violation() < 1e-10);
  }
}

TEST_CASE("exact sequence flags a lone Wilson bubble") {
  const RectGrid g = unit_grid(3, 3);
  const DofMap wilson = build_dof_map(SpaceKind::Wilson, g, true);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(wilson.n_free);
  c(wilson.cell_dof[g.cell_id(1, 1)]) = 1.0;
  const auto rep = verify_exact_sequence(expand_to_cells(g, wilson, c), g);
  CHECK(rep.max_ps_jump > 1e-3);

  const auto zero = verify_exact_sequence(
      expand_to_cells(g, wilson, Eigen::VectorXd::Zero(wilson.n_free)), g);
  CHECK(zero.max_violation() == 0.0);
}

TEST_CASE("dims report") {
  const DimsReport rep = compute_dims(unit_grid(3, 3));
  CHECK(rep.dim_wilson == 22);
  CHECK(rep.n_constraints == 12);
  CHECK(rep.rank == 12);
  CHECK(rep.dim_rrm == 10);
  CHECK(rep.dim_mc_hom == 13);
  CHECK(rep.dim_mc == 30);
}
