#pragma once

#include <iosfwd>
#include <vector>

#include "rrmfem/assembly.hpp"

namespace rrm {

/// Cellwise polynomial representation of a discrete solution.
struct DiscreteField {
  RectGrid grid;
  std::vector<LocalQuad> cells;  // size m*n, zero on inactive cells
};

DiscreteField expand_solution(const RectGrid& g, const DofMap& map, const Eigen::VectorXd& coeffs);

/// Reduced-basis coordinates expanded through Z to the parent dof map.
DiscreteField expand_reduced_solution(const RectGrid& g, const DofMap& map,
                                      const ReducedSystem& red, const Eigen::VectorXd& c);

struct Norms {
  double energy = 0.0;  // broken H1 seminorm of the error
  double l2 = 0.0;      // rho-weighted L2 norm of the error
};

Norms error_norms(const DiscreteField& uh, const ScalarField& u, const VectorField& grad_u,
                  const ScalarField& rho, Exec exec = Exec::Parallel);

/// Broken energy distance between two fields on the same grid.
double broken_energy_distance(const DiscreteField& a, const DiscreteField& b);
double broken_energy_norm(const DiscreteField& a);

struct LevelError {
  int level = 0;
  double h = 0.0, hx = 0.0;
  double energy = 0.0, l2 = 0.0;
  double eoc_energy = 0.0, eoc_l2 = 0.0;  // 0 for the first level
};

struct ErrorReport {
  std::vector<LevelError> rows;
};

/// EOC_k = log(e_k / e_{k+1}) / log(h_k / h_{k+1}) between consecutive rows.
void fill_eoc(ErrorReport& rep);

struct EigenLevel {
  int level = 0;
  double h = 0.0, hx = 0.0;
  std::vector<double> lambdas;
};

struct LowerBoundColumn {
  int j = 0;
  bool below_exact = true;
  bool monotone = true;
  bool degenerate_exact = false;  // computed value equals the exact one
  std::vector<double> gaps;       // lambda_j - lambda_{j,h} per level
  std::vector<double> eoc;        // of the gaps
  std::vector<double> scaled_gap;  // gap / h^2
};

struct LowerBoundReport {
  std::vector<LowerBoundColumn> columns;
};

LowerBoundReport lower_bound_report(const std::vector<EigenLevel>& levels,
                                    const std::vector<double>& lambda_exact);

struct L2LowerBoundReport {
  bool skipped = false;  // ||f|| = 0 precondition
  std::vector<double> ratio;  // e_L2 / h^2 per level
  double min_max_ratio = 0.0;  // over the last three levels
  bool pass = false;
};

L2LowerBoundReport l2_lower_bound_check(const ErrorReport& rep, bool f_nonzero = true);

void write_error_csv(std::ostream& os, const ErrorReport& rep);
void write_error_json(std::ostream& os, const ErrorReport& rep);
/// Order columns report the convergence rate of lambda_exact - lambda_h when
/// the exact values are supplied.
void write_eigen_csv(std::ostream& os, const std::vector<EigenLevel>& levels,
                     const std::vector<double>* lambda_exact = nullptr);
void write_eigen_json(std::ostream& os, const std::vector<EigenLevel>& levels,
                      const std::vector<double>* lambda_exact = nullptr);

}  // namespace rrm
