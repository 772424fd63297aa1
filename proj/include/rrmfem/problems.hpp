#pragma once

#include <vector>

#include "rrmfem/local.hpp"

namespace rrm {

/// Manufactured data for the source problem: -lap u = rho f, u = 0 on the
/// boundary.
struct ManufacturedProblem {
  ScalarField u, f, rho;
  VectorField grad_u;
};

/// u = sin(pi x) sin(pi y), f = 2 pi^2 sin(pi x) sin(pi y), rho = 1. The
/// solution vanishes on the boundaries of the unit square, of (0,2)^2 and of
/// the L-shape carved from it.
ManufacturedProblem example1();

ScalarField constant_field(double value);

/// Smallest k Dirichlet-Laplace eigenvalues of the unit square:
/// (k^2 + l^2) pi^2 sorted with multiplicity.
std::vector<double> unit_square_eigenvalues(int k);

/// The third L-shape eigenvalue is analytic: 2 pi^2, with eigenfunction
/// sin(pi x) sin(pi y) on (0,2)^2 \ [1,2]^2.
double lshape_lambda3();

}  // namespace rrm
