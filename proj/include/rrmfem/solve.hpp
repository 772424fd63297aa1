#pragma once

#include <string>
#include <vector>

#include "rrmfem/assembly.hpp"

namespace rrm {

struct SaddleSolution {
  Eigen::VectorXd u;      // Wilson coefficients
  Eigen::VectorXd delta;  // multiplier per interior edge
  double primal_residual = 0.0;
  double constraint_residual = 0.0;
};

/// Direct symmetric-indefinite solve of [[K, B^T], [B, 0]] [u; delta] = [F; 0]
/// with one step of iterative refinement.
SaddleSolution solve_source_saddle(const AssembledSystem& sys);

/// Direct SPD solve K u = F over the system's free dofs.
Eigen::VectorXd solve_source_direct(const AssembledSystem& sys);

/// Direct SPD solve of the reduced system; returns basis coordinates.
Eigen::VectorXd solve_source_reduced(const ReducedSystem& red);

struct EigenResult {
  std::vector<double> lambdas;  // ascending
  Eigen::MatrixXd vectors;      // columns, M-orthonormal, largest coefficient +1
  std::string method;
  int iterations = 0;
  // max_i ||K x_i - lambda_i M x_i||_2; for constrained pencils the
  // range(B^T) multiplier component is projected out first
  double max_residual = 0.0;
};

/// k smallest eigenpairs of K x = lambda M x. Dense path up to dense_limit
/// unknowns, block shift-invert subspace iteration above it.
EigenResult eig_system(const SpMat& K, const SpMat& M, int k, int dense_limit = 5000);

EigenResult eig_smallest(const ReducedSystem& red, int k, int dense_limit = 5000);

/// k smallest eigenpairs of the unconstrained nonconforming RM system.
EigenResult eig_rm(const AssembledSystem& sys, int k, int dense_limit = 5000);

/// k smallest eigenpairs of K x = lambda M x subject to B x = 0, by inverse
/// subspace iteration through the KKT factorization. Used on domains where
/// the explicit RRM basis is not available (L-shape).
EigenResult eig_constrained(const AssembledSystem& sys, int k);

/// Nodal interpolant onto the RM space: vertex values of u and 2-point Gauss
/// edge means of its normal derivative. Cellwise polynomials.
std::vector<LocalQuad> rm_interpolant(const RectGrid& g, const ScalarField& u,
                                      const VectorField& grad_u);

/// a_h(u - Pi u, Pi u) over the grid (4x4 Gauss per cell).
double rm_interpolant_form(const RectGrid& g, const ScalarField& u, const VectorField& grad_u);

struct InterpolantDiagnostic {
  std::vector<double> h;      // per level
  std::vector<double> q;      // a_h(u - Pi u, Pi u) / h^2
  std::vector<double> ratio;  // q_{l+1} / q_l
};

InterpolantDiagnostic rm_interpolant_diagnostic(const ScalarField& u, const VectorField& grad_u,
                                                const std::vector<RectGrid>& grids);

}  // namespace rrm
