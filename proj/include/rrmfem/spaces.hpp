#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rrmfem/local.hpp"
#include "rrmfem/mesh.hpp"

namespace rrm {

using SpMat = Eigen::SparseMatrix<double>;

enum class SpaceKind { Q1, Wilson, WilsonBroken, MC, RM, RRM };

std::string space_name(SpaceKind k);

/// Global degree-of-freedom map. Entity arrays hold the global dof id or -1
/// for constrained/absent entities.
///  Q1:           vertex values.
///  Wilson:       vertex values + two bubble dofs per cell (xx then yy).
///  WilsonBroken: six dofs per cell (a1..a4, xx, yy), no sharing; carries the
///                MC element basis, whose members are vertex-discontinuous.
///  RM:           vertex values + one edge dof per edge (mean of d/dx on
///                vertical edges, d/dy on horizontal edges).
/// With homogeneous = true, vertex dofs on the domain boundary are removed.
struct DofMap {
  SpaceKind kind = SpaceKind::Wilson;
  bool homogeneous = true;
  int m = 0, n = 0;
  int n_free = 0;
  std::vector<int> vertex_dof;  // (m+1)*(n+1)
  std::vector<int> cell_dof;    // m*n, base id (Wilson: 2 per cell; Broken: 6)
  std::vector<int> hedge_dof, vedge_dof;  // RM only

  int local_size() const;
  /// Global dofs of the cell's local basis functions, -1 where constrained.
  void cell_dofs(int i, int j, int* out) const;
};

DofMap build_dof_map(SpaceKind kind, const RectGrid& g, bool homogeneous = true);

/// Local basis matching the DofMap's per-cell dof order.
std::vector<LocalQuad> local_basis(const DofMap& map, const CellGeom& c);

/// One row per interior edge: the jump of the edge mean of the normal
/// derivative, columns over the Wilson map's dofs. Normals of vertical edges
/// point +x and of horizontal edges +y; a jump is the mean from the cell on
/// the + side minus the mean from the cell on the - side. Rows are ordered:
/// interior horizontal edges by id, then interior vertical edges by id.
struct EdgeRef {
  bool horizontal = false;
  int i = 0, j = 0;
};

struct ConstraintMatrix {
  SpMat B;
  std::vector<EdgeRef> rows;
};

ConstraintMatrix build_constraints_rrm(const RectGrid& g, const DofMap& wilson);

enum class PatternKind {
  BottomEdge, TopEdge, LeftEdge, RightEdge, Corner, InteriorCell, Column, Row,
  VertexBilinear, CellBubble, ColumnStrip, RowStrip
};

std::string pattern_name(PatternKind k);

struct BasisVector {
  PatternKind kind;
  int i = 0, j = 0;  // 1-based anchor indices where applicable
  Eigen::SparseVector<double> coeffs;
};

/// Basis of a constrained space, stored as coefficient vectors over the
/// companion dof map (Wilson for RRM, WilsonBroken for MC).
struct ExplicitBasis {
  SpaceKind space = SpaceKind::RRM;
  DofMap map;
  std::vector<BasisVector> members;

  int count() const { return (int)members.size(); }
  SpMat matrix() const;  // map.n_free x count
};

/// Appendix-style basis of the homogeneous RRM space on a full m x n
/// rectangle (m, n >= 2): boundary-edge, corner, interior-cell, column and
/// row patterns, each found as the one-dimensional nullspace of the local
/// compatibility system on its patch. Vectors are normalized so the
/// largest-magnitude Wilson coefficient is +1.
ExplicitBasis build_rrm_basis(const RectGrid& g);

/// MC element basis over the broken Wilson map: interior-vertex bilinears
/// plus one bubble per cell (homogeneous), or all vertex bilinears, bubbles
/// minus the first, and the column/row strips (non-homogeneous).
ExplicitBasis build_mc_basis(const RectGrid& g, bool homogeneous);

/// Per-cell polynomial expansion of a coefficient vector (inactive cells
/// hold zero polynomials).
std::vector<LocalQuad> expand_to_cells(const RectGrid& g, const DofMap& map,
                                       const Eigen::VectorXd& coeffs);

bool membership_rrm(const ConstraintMatrix& B, const Eigen::VectorXd& coeffs,
                    double tol = 1e-9);

Eigen::VectorXd dense_coeffs(const Eigen::SparseVector<double>& v);

/// Numerical check that curl_h of a function lies in the divergence-free
/// subspace of the vector Park-Sheen space.
struct ExactSequenceReport {
  double max_nonlinear = 0.0;        // curl components must be piecewise linear
  double max_ps_jump = 0.0;          // edge-mean continuity across interior edges
  double max_boundary_normal = 0.0;  // zero edge-mean normal component on boundary
  double max_divergence = 0.0;       // cellwise div curl = 0
  double max_violation() const;
};

ExactSequenceReport verify_exact_sequence(const std::vector<LocalQuad>& cells,
                                          const RectGrid& g);
ExactSequenceReport verify_exact_sequence(const ExplicitBasis& basis, const RectGrid& g);

/// Sizes reported by the `dims` command; rank is computed numerically.
struct DimsReport {
  int m = 0, n = 0;
  int dim_wilson = 0;
  int n_constraints = 0;
  int rank = 0;
  int dim_rrm = 0;
  int dim_mc_hom = 0;
  int dim_mc = 0;
};

DimsReport compute_dims(const RectGrid& g);

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol = 1e-9);

}  // namespace rrm
