#include "rrmfem/solve.hpp"

#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace rrm {

namespace {

SpMat kkt_matrix(const SpMat& K, const SpMat& B) {
  const int nf = (int)K.rows(), nc = (int)B.rows();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(K.nonZeros() + 2 * B.nonZeros());
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      trips.emplace_back((int)it.row(), (int)it.col(), it.value());
  for (int k = 0; k < B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B, k); it; ++it) {
      trips.emplace_back(nf + (int)it.row(), (int)it.col(), it.value());
      trips.emplace_back((int)it.col(), nf + (int)it.row(), it.value());
    }
  SpMat A(nf + nc, nf + nc);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

void throw_singular_kkt(const ConstraintMatrix& B, int n_free) {
  std::string msg = "singular KKT system";
  if ((long long)B.B.rows() * B.B.cols() <= 4'000'000LL) {
    const int r = numerical_rank(Eigen::MatrixXd(B.B));
    msg += " (constraint rank " + std::to_string(r) + " of " + std::to_string(B.B.rows()) +
           " rows, " + std::to_string(n_free) + " primal dofs)";
  }
  throw NumericalError(msg);
}

void fix_sign(Eigen::MatrixXd& X) {
  for (int c = 0; c < X.cols(); ++c) {
    int best = 0;
    for (int r = 1; r < X.rows(); ++r)
      if (std::abs(X(r, c)) > std::abs(X(best, c))) best = r;
    if (X(best, c) < 0.0) X.col(c) = -X.col(c);
  }
}

using ResidualProjector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// For constrained pencils the stationarity condition carries a multiplier,
// K x - lambda M x = -B^T delta, so the residual is measured after removing
// its range(B^T) component.
EigenResult finalize(const SpMat& K, const SpMat& M, Eigen::MatrixXd X,
                     std::vector<double> lambdas, std::string method, int iterations,
                     const ResidualProjector& project = {}) {
  fix_sign(X);
  EigenResult res;
  res.method = std::move(method);
  res.iterations = iterations;
  res.lambdas = std::move(lambdas);
  res.vectors = std::move(X);
  for (int c = 0; c < res.vectors.cols(); ++c) {
    Eigen::VectorXd r = K * res.vectors.col(c) - res.lambdas[c] * (M * res.vectors.col(c));
    if (project) r = project(r);
    res.max_residual = std::max(res.max_residual, r.norm());
  }
  return res;
}

EigenResult eig_dense(const SpMat& K, const SpMat& M, int k) {
  const Eigen::MatrixXd Kd(K), Md(M);
  Eigen::LLT<Eigen::MatrixXd> llt(Md);
  if (llt.info() != Eigen::Success) throw NumericalError("mass matrix not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Kd, Md);
  if (ges.info() != Eigen::Success) throw NumericalError("dense generalized eigensolve failed");
  std::vector<double> lambdas(ges.eigenvalues().data(), ges.eigenvalues().data() + k);
  return finalize(K, M, ges.eigenvectors().leftCols(k), std::move(lambdas), "dense", 1);
}

// Block inverse subspace iteration with Rayleigh-Ritz; solve_op applies the
// (possibly constrained) inverse of K to M x. max_subspace caps the block at
// the dimension of the admissible space so the QR completion cannot leak
// directions outside it into the Ritz values.
EigenResult subspace_smallest(const SpMat& K, const SpMat& M, int k,
                              const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve_op,
                              const std::string& method, int max_subspace,
                              const ResidualProjector& project = {}) {
  const int n = (int)K.rows();
  const int s = std::min(std::min(n, max_subspace), std::max(2 * k + 4, k + 2));
  if (s < k) throw PreconditionError("subspace smaller than the requested eigenpair count");
  std::mt19937 gen(20240601u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::MatrixXd X(n, s);
  for (int c = 0; c < s; ++c)
    for (int r = 0; r < n; ++r) X(r, c) = dist(gen);

  Eigen::MatrixXd Ritz;
  std::vector<double> lambdas(k);
  int iter = 0;
  const int max_iter = 400;
  for (iter = 1; iter <= max_iter; ++iter) {
    Eigen::MatrixXd Y(n, s);
    for (int c = 0; c < s; ++c) Y.col(c) = solve_op(M * X.col(c));
    // orthonormalize for conditioning
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Y = qr.householderQ() * Eigen::MatrixXd::Identity(n, s);
    const Eigen::MatrixXd KY = K * Y, MY = M * Y;
    const Eigen::MatrixXd Gk = Y.transpose() * KY, Gm = Y.transpose() * MY;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Gk, Gm);
    if (ges.info() != Eigen::Success) throw NumericalError("Rayleigh-Ritz eigensolve failed");
    X = Y * ges.eigenvectors();
    const Eigen::VectorXd theta = ges.eigenvalues().head(k);

    // Ritz residuals of the k target pairs decide convergence
    const Eigen::MatrixXd C = ges.eigenvectors().leftCols(k);
    const Eigen::MatrixXd KX = KY * C, MX = MY * C;
    double rel = 0.0;
    for (int c = 0; c < k; ++c) {
      Eigen::VectorXd r = KX.col(c) - theta(c) * MX.col(c);
      if (project) r = project(r);
      rel = std::max(rel, r.norm() / (KX.col(c).norm() + std::abs(theta(c)) * MX.col(c).norm()));
    }
    if (rel < 1e-11 || iter == max_iter) {
      for (int c = 0; c < k; ++c) lambdas[c] = theta(c);
      Ritz = X.leftCols(k);
      break;
    }
  }
  EigenResult res =
      finalize(K, M, std::move(Ritz), std::move(lambdas), method, std::min(iter, 400), project);
  if (!(res.max_residual <= 1e-7 * K.norm()))
    throw NumericalError("subspace iteration did not converge (residual " +
                         std::to_string(res.max_residual) + ")");
  return res;
}

}  // namespace

SaddleSolution solve_source_saddle(const AssembledSystem& sys) {
  if (!sys.B) throw PreconditionError("saddle solve requires a constraint matrix");
  const SpMat& B = sys.B->B;
  const int nf = (int)sys.K.rows(), nc = (int)B.rows();
  const SpMat A = kkt_matrix(sys.K, B);
  Eigen::SparseLU<SpMat> lu(A);
  if (lu.info() != Eigen::Success) throw_singular_kkt(*sys.B, nf);

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + nc);
  rhs.head(nf) = sys.F;
  Eigen::VectorXd x = lu.solve(rhs);
  x += lu.solve(rhs - A * x);  // one refinement step

  SaddleSolution sol;
  sol.u = x.head(nf);
  sol.delta = x.tail(nc);
  sol.primal_residual = (sys.K * sol.u + B.transpose() * sol.delta - sys.F).cwiseAbs().maxCoeff();
  sol.constraint_residual = nc > 0 ? (B * sol.u).cwiseAbs().maxCoeff() : 0.0;
  const double scale = std::max(1.0, sys.F.cwiseAbs().maxCoeff());
  if (!(sol.primal_residual < 1e-6 * scale) || !(sol.constraint_residual < 1e-6 * scale))
    throw_singular_kkt(*sys.B, nf);
  return sol;
}

Eigen::VectorXd solve_source_direct(const AssembledSystem& sys) {
  Eigen::SimplicialLLT<SpMat> llt(sys.K);
  if (llt.info() != Eigen::Success)
    throw NumericalError("stiffness matrix not positive definite");
  return llt.solve(sys.F);
}

Eigen::VectorXd solve_source_reduced(const ReducedSystem& red) {
  Eigen::SimplicialLLT<SpMat> llt(red.Kr);
  if (llt.info() != Eigen::Success)
    throw NumericalError("reduced stiffness not positive definite (dependent basis?)");
  return llt.solve(red.Fr);
}

EigenResult eig_system(const SpMat& K, const SpMat& M, int k, int dense_limit) {
  if (k < 1 || k > K.rows()) throw PreconditionError("invalid eigenpair count");
  if (K.rows() <= dense_limit) return eig_dense(K, M, k);
  // shifted factorization keeps the Cholesky safely definite
  const double sigma =
      1e-8 * (Eigen::VectorXd(K.diagonal()).sum() / std::max(1e-300, Eigen::VectorXd(M.diagonal()).sum()));
  SpMat Ks = K + sigma * M;
  auto llt = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(Ks);
  if (llt->info() != Eigen::Success) throw NumericalError("stiffness factorization failed");
  auto op = [llt](const Eigen::VectorXd& x) { return Eigen::VectorXd(llt->solve(x)); };
  return subspace_smallest(K, M, k, op, "shift-invert", (int)K.rows());
}

EigenResult eig_smallest(const ReducedSystem& red, int k, int dense_limit) {
  return eig_system(red.Kr, red.Mr, k, dense_limit);
}

EigenResult eig_rm(const AssembledSystem& sys, int k, int dense_limit) {
  if (sys.space != SpaceKind::RM) throw PreconditionError("eig_rm expects an RM system");
  return eig_system(sys.K, sys.M, k, dense_limit);
}

EigenResult eig_constrained(const AssembledSystem& sys, int k) {
  if (!sys.B) throw PreconditionError("constrained eigensolve requires a constraint matrix");
  const int nf = (int)sys.K.rows(), nc = (int)sys.B->B.rows();
  if (k < 1 || k > nf - nc) throw PreconditionError("invalid eigenpair count");
  const SpMat A = kkt_matrix(sys.K, sys.B->B);
  auto lu = std::make_shared<Eigen::SparseLU<SpMat>>(A);
  if (lu->info() != Eigen::Success) throw_singular_kkt(*sys.B, nf);
  auto op = [lu, nf, nc](const Eigen::VectorXd& x) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + nc);
    rhs.head(nf) = x;
    return Eigen::VectorXd(lu->solve(rhs).head(nf));
  };
  ResidualProjector project;
  if (nc > 0) {
    const SpMat B = sys.B->B;
    auto gram = std::make_shared<Eigen::SimplicialLLT<SpMat>>(SpMat(B * SpMat(B.transpose())));
    if (gram->info() != Eigen::Success) throw_singular_kkt(*sys.B, nf);
    project = [B, gram](const Eigen::VectorXd& r) {
      return Eigen::VectorXd(r - B.transpose() * gram->solve(B * r));
    };
  }
  // the admissible space is ker B; with B of full row rank its dimension is
  // nf - nc, and the block must not outgrow it
  return subspace_smallest(sys.K, sys.M, k, op, "kkt-subspace", nf - nc, project);
}

std::vector<LocalQuad> rm_interpolant(const RectGrid& g, const ScalarField& u,
                                      const VectorField& grad_u) {
  EntityIndex idx(g);
  std::vector<double> vval((g.m + 1) * (g.n + 1), 0.0);
  std::vector<double> hmean(g.m * (g.n + 1), 0.0), vmean((g.m + 1) * g.n, 0.0);
  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i <= g.m; ++i)
      if (idx.vertex_exists[idx.vertex_id(i, j)]) vval[idx.vertex_id(i, j)] = u(g.xs[i], g.ys[j]);

  const auto& gr = GaussRule::get();
  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      if (!idx.hedge_exists[idx.hedge_id(i, j)]) continue;
      double s = 0.0;
      for (double t : {gr.theta1, gr.theta2})
        s += grad_u(g.xs[i] + t * g.cell_width(i), g.ys[j]).y();
      hmean[idx.hedge_id(i, j)] = 0.5 * s;
    }
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i <= g.m; ++i) {
      if (!idx.vedge_exists[idx.vedge_id(i, j)]) continue;
      double s = 0.0;
      for (double t : {gr.theta1, gr.theta2})
        s += grad_u(g.xs[i], g.ys[j] + t * g.cell_height(j)).x();
      vmean[idx.vedge_id(i, j)] = 0.5 * s;
    }

  std::vector<LocalQuad> cells(g.m * g.n);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      const CellGeom geom = cell_geom(g, i, j);
      cells[g.cell_id(i, j)] = LocalQuad(geom);
      if (!g.cell_active(i, j)) continue;
      const auto basis = rm_local_basis(geom);
      const double dofs[8] = {vval[idx.vertex_id(i, j)],     vval[idx.vertex_id(i + 1, j)],
                              vval[idx.vertex_id(i + 1, j + 1)], vval[idx.vertex_id(i, j + 1)],
                              hmean[idx.hedge_id(i, j)],     vmean[idx.vedge_id(i + 1, j)],
                              hmean[idx.hedge_id(i, j + 1)], vmean[idx.vedge_id(i, j)]};
      for (int b = 0; b < 8; ++b)
        if (dofs[b] != 0.0) cells[g.cell_id(i, j)] += dofs[b] * basis[b];
    }
  return cells;
}

double rm_interpolant_form(const RectGrid& g, const ScalarField& u, const VectorField& grad_u) {
  const auto cells = rm_interpolant(g, u, grad_u);
  const auto& gr = GaussRule::get();
  double total = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      if (!g.cell_active(i, j)) continue;
      const CellGeom geom = cell_geom(g, i, j);
      const LocalQuad& pi = cells[g.cell_id(i, j)];
      double acc = 0.0;
      for (int qj = 0; qj < 4; ++qj)
        for (int qi = 0; qi < 4; ++qi) {
          const double x = geom.xc() + 0.5 * geom.hx * gr.nodes[qi];
          const double y = geom.yc() + 0.5 * geom.hy * gr.nodes[qj];
          const double w = gr.weights[qi] * gr.weights[qj] * 0.25 * geom.hx * geom.hy;
          const Eigen::Vector2d gpi = pi.grad(x, y);
          acc += w * (grad_u(x, y) - gpi).dot(gpi);
        }
      total += acc;
    }
  return total;
}

InterpolantDiagnostic rm_interpolant_diagnostic(const ScalarField& u, const VectorField& grad_u,
                                                const std::vector<RectGrid>& grids) {
  InterpolantDiagnostic diag;
  for (const auto& g : grids) {
    const double h = g.max_h();
    diag.h.push_back(h);
    diag.q.push_back(rm_interpolant_form(g, u, grad_u) / (h * h));
  }
  for (size_t l = 0; l + 1 < diag.q.size(); ++l) diag.ratio.push_back(diag.q[l + 1] / diag.q[l]);
  return diag;
}

}  // namespace rrm
