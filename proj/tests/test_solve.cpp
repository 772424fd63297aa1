#include <doctest.h>

#include <random>

#include "rrmfem/postproc.hpp"
#include "rrmfem/problems.hpp"
#include "rrmfem/solve.hpp"

using namespace rrm;

namespace {

const ScalarField one = constant_field(1.0);
const ScalarField zero = constant_field(0.0);

DiscreteField rrm_saddle_field(const RectGrid& g, const ManufacturedProblem& prob) {
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, prob.rho, prob.f);
  return expand_solution(g, sys.map, solve_source_saddle(sys).u);
}

}  // namespace

TEST_CASE("zero data gives zero solutions") {
  const RectGrid g = build_uniform(3, 3, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const SaddleSolution sol = solve_source_saddle(sys);
  CHECK(sol.u.cwiseAbs().maxCoeff() < 1e-14);
  CHECK(sol.delta.cwiseAbs().maxCoeff() < 1e-14);

  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  CHECK(solve_source_reduced(red).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("saddle solution satisfies the constraints") {
  const ManufacturedProblem prob = example1();
  const RectGrid g = build_nonuniform_pattern(3);
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, prob.rho, prob.f);
  const SaddleSolution sol = solve_source_saddle(sys);
  CHECK(sol.constraint_residual < 1e-9 * sol.u.cwiseAbs().maxCoeff());
  CHECK(membership_rrm(*sys.B, sol.u));
}

TEST_CASE("energy error halves at second order across an RT pair") {
  const ManufacturedProblem prob = example1();
  double prev = 0.0;
  std::vector<double> errs;
  for (int m : {8, 16}) {
    const RectGrid g = build_uniform(m, m, Domain::unit_square());
    const Norms n = error_norms(rrm_saddle_field(g, prob), prob.u, prob.grad_u, prob.rho);
    errs.push_back(n.energy);
    prev = n.energy;
  }
  (void)prev;
  const double ratio = errs[0] / errs[1];
  CHECK(ratio > 3.4);
  CHECK(ratio < 4.6);
}

TEST_CASE("saddle and reduced formulations agree") {
  const ManufacturedProblem prob = example1();
  for (const RectGrid& g :
       {build_uniform(4, 4, Domain::unit_square()), build_uniform(4, 2, Domain::unit_square()),
        build_nonuniform_pattern(2)}) {
    const AssembledSystem sys = assemble(SpaceKind::RRM, g, prob.rho, prob.f);
    const DiscreteField a = expand_solution(g, sys.map, solve_source_saddle(sys).u);
    const ExplicitBasis basis = build_rrm_basis(g);
    const ReducedSystem red = reduce(sys, basis);
    const Eigen::VectorXd c = solve_source_reduced(red);
    const DiscreteField b = expand_reduced_solution(g, sys.map, red, c);
    CHECK(broken_energy_distance(a, b) < 1e-10 * broken_energy_norm(a));
    // expanded reduced solution is a member of the constrained space
    CHECK(membership_rrm(*sys.B, Eigen::VectorXd(red.Z * c)));
  }
}

TEST_CASE("degenerate one-dof eigenproblem") {
  ReducedSystem red;
  red.Kr.resize(1, 1);
  red.Kr.insert(0, 0) = 3.5;
  red.Mr.resize(1, 1);
  red.Mr.insert(0, 0) = 0.5;
  red.Fr = Eigen::VectorXd::Zero(1);
  const EigenResult res = eig_smallest(red, 1);
  CHECK(res.lambdas[0] == doctest::Approx(7.0).epsilon(1e-13));
  CHECK_THROWS_AS(eig_smallest(red, 2), PreconditionError);
}

TEST_CASE("reduced eigenvalues match the published uniform-grid values") {
  // cells 0.0625 x 0.125 on the unit square: the h = 0.125 table row
  const RectGrid g = build_uniform(16, 8, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  const EigenResult res = eig_smallest(red, 3);
  CHECK(std::abs(res.lambdas[0] - 19.428) < 2e-3);
  CHECK(std::abs(res.lambdas[1] - 48.127) < 2e-3);
  CHECK(std::abs(res.lambdas[2] - 48.163) < 2e-3);
}

TEST_CASE("published values survive on the large iterative path") {
  // cells 0.0078125 x 0.015625: reduced dimension 8193 exceeds the dense
  // limit, so this row runs through the sparse shift-invert path
  const RectGrid g = build_uniform(128, 64, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  REQUIRE(red.Kr.rows() == 8193);
  const EigenResult res = eig_smallest(red, 6);
  CHECK(res.method == "shift-invert");
  const double expect[6] = {19.734, 49.328, 49.328, 78.878, 98.652, 98.652};
  for (int j = 0; j < 6; ++j) CHECK(std::abs(res.lambdas[j] - expect[j]) < 2e-3);
}

TEST_CASE("lower bounds persist on the nonuniform pattern meshes") {
  const auto exact = unit_square_eigenvalues(6);
  std::vector<std::vector<double>> rows;
  for (int l = 2; l <= 4; ++l) {
    const RectGrid g = build_nonuniform_pattern(l);
    const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
    rows.push_back(eig_smallest(reduce(sys, build_rrm_basis(g)), 6).lambdas);
  }
  for (int j = 0; j < 6; ++j)
    for (size_t l = 0; l < rows.size(); ++l) {
      CHECK(rows[l][j] < exact[j]);
      if (l > 0) CHECK(rows[l][j] > rows[l - 1][j]);
    }
}

TEST_CASE("published L-shape rows via the constrained path") {
  const double table[2][6] = {{9.894, 13.443, 15.857, 23.914, 26.659, 33.739},
                              {9.811, 14.696, 18.558, 27.656, 30.410, 40.808}};
  int row = 0;
  for (int m : {4, 8}) {
    const RectGrid g = build_uniform(m, 2 * m, Domain::lshape());
    const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
    const EigenResult res = eig_constrained(sys, 6);
    for (int j = 0; j < 6; ++j) CHECK(std::abs(res.lambdas[j] - table[row][j]) < 2e-3);
    ++row;
  }
}

TEST_CASE("eigen result invariants") {
  const RectGrid g = build_uniform(6, 6, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  const EigenResult res = eig_smallest(red, 6);
  const Eigen::MatrixXd Mr(red.Mr), Kr(red.Kr);
  const Eigen::MatrixXd G = res.vectors.transpose() * Mr * res.vectors;
  CHECK((G - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(res.max_residual < 1e-8 * Kr.norm());
  // sign convention: the largest-magnitude coefficient of each vector is +1
  for (int c = 0; c < 6; ++c) {
    Eigen::Index idx;
    res.vectors.col(c).cwiseAbs().maxCoeff(&idx);
    CHECK(res.vectors(idx, c) > 0.0);
  }
}

TEST_CASE("iterative path agrees with the dense path") {
  const RectGrid g = build_uniform(8, 4, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  const EigenResult dense = eig_smallest(red, 4);
  const EigenResult iter = eig_smallest(red, 4, /*dense_limit=*/1);
  CHECK(iter.method == "shift-invert");
  for (int j = 0; j < 4; ++j)
    CHECK(iter.lambdas[j] == doctest::Approx(dense.lambdas[j]).epsilon(1e-9));

  const EigenResult kkt = eig_constrained(sys, 4);
  CHECK(kkt.method == "kkt-subspace");
  for (int j = 0; j < 4; ++j)
    CHECK(kkt.lambdas[j] == doctest::Approx(dense.lambdas[j]).epsilon(1e-9));
}

TEST_CASE("constrained eigensolve on a tiny L-shape") {
  // three active cells: the admissible space has dimension 4 and the block
  // must shrink to it
  const RectGrid g = build_uniform(2, 2, Domain::lshape());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  REQUIRE(sys.K.rows() == 6);
  REQUIRE(sys.B->B.rows() == 2);
  const EigenResult res = eig_constrained(sys, 2);

  // independent route: dense kernel basis of B, then a dense solve
  const Eigen::MatrixXd Bd(sys.B->B);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bd, Eigen::ComputeFullV);
  const Eigen::MatrixXd Zk = svd.matrixV().rightCols(4);
  const Eigen::MatrixXd Kk = Zk.transpose() * Eigen::MatrixXd(sys.K) * Zk;
  const Eigen::MatrixXd Mk = Zk.transpose() * Eigen::MatrixXd(sys.M) * Zk;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kk, Mk);
  for (int j = 0; j < 2; ++j)
    CHECK(res.lambdas[j] == doctest::Approx(ges.eigenvalues()(j)).epsilon(1e-10));
  CHECK_THROWS_AS(eig_constrained(sys, 5), PreconditionError);
}

TEST_CASE("RM eigenvalues bound RRM eigenvalues from below") {
  const RectGrid g = build_uniform(8, 4, Domain::unit_square());
  const AssembledSystem rm = assemble(SpaceKind::RM, g, one, zero);
  const EigenResult rm_res = eig_rm(rm, 6);
  const AssembledSystem rrm = assemble(SpaceKind::RRM, g, one, zero);
  const EigenResult rrm_res = eig_smallest(reduce(rrm, build_rrm_basis(g)), 6);
  const auto exact = unit_square_eigenvalues(6);
  for (int j = 0; j < 6; ++j) {
    CHECK(rm_res.lambdas[j] <= rrm_res.lambdas[j] + 1e-10);
    CHECK(rm_res.lambdas[j] < exact[j]);
    CHECK(rrm_res.lambdas[j] < exact[j]);
  }
}

TEST_CASE("eigenvalues are invariant under domain translation") {
  const RectGrid a = build_uniform(6, 6, Domain::unit_square());
  const RectGrid b = build_uniform(6, 6, Domain::rectangle(1.0, 1.0, 0.3, -0.7));
  for (const SpaceKind space : {SpaceKind::RM, SpaceKind::Q1}) {
    const AssembledSystem sa = assemble(space, a, one, zero);
    const AssembledSystem sb = assemble(space, b, one, zero);
    const EigenResult ra = eig_system(sa.K, sa.M, 4);
    const EigenResult rb = eig_system(sb.K, sb.M, 4);
    for (int j = 0; j < 4; ++j)
      CHECK(ra.lambdas[j] == doctest::Approx(rb.lambdas[j]).epsilon(1e-11));
  }
}

TEST_CASE("matrix-level Rayleigh quotient identity") {
  const RectGrid g = build_uniform(4, 4, Domain::unit_square());
  const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
  const ReducedSystem red = reduce(sys, build_rrm_basis(g));
  const Eigen::MatrixXd Kr(red.Kr), Mr(red.Mr);
  const EigenResult res = eig_smallest(red, 1);
  const Eigen::VectorXd u1 = res.vectors.col(0);
  const double l1 = res.lambdas[0];

  std::mt19937 rng(4321u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd v(Kr.rows());
    for (int i = 0; i < v.size(); ++i) v(i) = dist(rng);
    v /= std::sqrt(v.dot(Mr * v));
    const double R = v.dot(Kr * v);
    const Eigen::VectorXd d = v - u1;
    const double rhs = d.dot(Kr * d) - l1 * d.dot(Mr * d);
    CHECK(R - l1 == doctest::Approx(rhs).epsilon(1e-8));
  }
}

TEST_CASE("monotone increase of RRM eigenvalues under refinement") {
  std::vector<std::vector<double>> levels;
  for (int m : {4, 8, 16}) {
    const RectGrid g = build_uniform(m, m / 2, Domain::unit_square());
    const AssembledSystem sys = assemble(SpaceKind::RRM, g, one, zero);
    levels.push_back(eig_smallest(reduce(sys, build_rrm_basis(g)), 6).lambdas);
  }
  const auto exact = unit_square_eigenvalues(6);
  for (int j = 0; j < 6; ++j) {
    CHECK(levels[0][j] < levels[1][j]);
    CHECK(levels[1][j] < levels[2][j]);
    CHECK(levels[2][j] < exact[j]);
  }
}

TEST_CASE("discrete energy decreases monotonically to the exact Dirichlet energy") {
  // a(u, u) = pi^2/2 for u = sin(pi x) sin(pi y) on the unit square
  const ManufacturedProblem prob = example1();
  const double exact = M_PI * M_PI / 2.0;
  RectGrid g = build_uniform(4, 4, Domain::unit_square());
  double prev_energy = 1e300;
  for (int l = 0; l < 3; ++l) {
    const AssembledSystem sys = assemble(SpaceKind::RRM, g, prob.rho, prob.f);
    const SaddleSolution sol = solve_source_saddle(sys);
    const double energy = sol.u.dot(sys.K * sol.u);
    CHECK(energy > exact);
    CHECK(energy < prev_energy);
    prev_energy = energy;
    g = refine(g);
  }
  CHECK(prev_energy - exact < 0.04);
}

TEST_CASE("RM interpolant reproduces its local polynomial space") {
  const RectGrid g = build_uniform(4, 4, Domain::unit_square());
  // affine field
  const ScalarField ux = [](double x, double) { return x; };
  const VectorField gx = [](double, double) { return Eigen::Vector2d(1.0, 0.0); };
  CHECK(std::abs(rm_interpolant_form(g, ux, gx)) < 1e-13);
  // xy lies in P2 on every cell, so the interpolant reproduces it as well
  const ScalarField uxy = [](double x, double y) { return x * y; };
  const VectorField gxy = [](double x, double y) { return Eigen::Vector2d(y, x); };
  CHECK(std::abs(rm_interpolant_form(g, uxy, gxy)) < 1e-13);
}

TEST_CASE("RM interpolant energy defect scales like h^2") {
  const ManufacturedProblem prob = example1();
  std::vector<RectGrid> grids;
  for (int m : {8, 16, 32}) grids.push_back(build_uniform(m, m, Domain::unit_square()));
  const InterpolantDiagnostic diag = rm_interpolant_diagnostic(prob.u, prob.grad_u, grids);
  for (double q : diag.q) CHECK(q > 0.0);
  for (double r : diag.ratio) {
    CHECK(r > 0.5);
    CHECK(r < 2.0);
  }
}
