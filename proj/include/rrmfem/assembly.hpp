#pragma once

#include <iosfwd>
#include <optional>

#include "rrmfem/spaces.hpp"

namespace rrm {

/// Kernel execution policy. Parallel runs the cell loops under OpenMP; both
/// policies produce bit-identical results (each cell writes to its own slot
/// and reductions happen in cell order).
enum class Exec { Serial, Parallel };

struct AssembledSystem {
  SpaceKind space = SpaceKind::Wilson;
  RectGrid grid;
  DofMap map;
  SpMat K, M;
  Eigen::VectorXd F;
  std::optional<ConstraintMatrix> B;  // present for RRM saddle systems
};

/// Assemble stiffness/mass/load over the free dofs of the space. Homogeneous
/// vertex boundary conditions are imposed by dof elimination. SpaceKind::RRM
/// assembles the homogeneous Wilson system plus the interior-edge constraint
/// matrix; SpaceKind::MC assembles the broken (cellwise) Wilson system that
/// carries the MC basis.
AssembledSystem assemble(SpaceKind space, const RectGrid& g, const ScalarField& rho,
                         const ScalarField& f, bool homogeneous = true,
                         Exec exec = Exec::Parallel);

struct ReducedSystem {
  SpMat Kr, Mr;
  Eigen::VectorXd Fr;
  SpMat Z;  // basis columns over the parent system's dofs
};

/// Galerkin triple products Z^T K Z, Z^T M Z, Z^T F for an explicit basis.
ReducedSystem reduce(const AssembledSystem& sys, const ExplicitBasis& basis);

/// Coordinate text format: "row col value" per line, 1-based indices.
void write_coordinate(std::ostream& os, const SpMat& A);
void write_coordinate(std::ostream& os, const Eigen::VectorXd& v);

}  // namespace rrm
