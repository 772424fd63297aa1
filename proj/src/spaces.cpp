#include "rrmfem/spaces.hpp"

#include <algorithm>
#include <cmath>

namespace rrm {

Eigen::VectorXd dense_coeffs(const Eigen::SparseVector<double>& v) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(v.size());
  for (Eigen::SparseVector<double>::InnerIterator it(v); it; ++it) d((int)it.index()) = it.value();
  return d;
}

std::string space_name(SpaceKind k) {
  switch (k) {
    case SpaceKind::Q1: return "q1";
    case SpaceKind::Wilson: return "wilson";
    case SpaceKind::WilsonBroken: return "wilson-broken";
    case SpaceKind::MC: return "mc";
    case SpaceKind::RM: return "rm";
    case SpaceKind::RRM: return "rrm";
  }
  return "?";
}

std::string pattern_name(PatternKind k) {
  switch (k) {
    case PatternKind::BottomEdge: return "bottom-edge";
    case PatternKind::TopEdge: return "top-edge";
    case PatternKind::LeftEdge: return "left-edge";
    case PatternKind::RightEdge: return "right-edge";
    case PatternKind::Corner: return "corner";
    case PatternKind::InteriorCell: return "interior-cell";
    case PatternKind::Column: return "column";
    case PatternKind::Row: return "row";
    case PatternKind::VertexBilinear: return "vertex-bilinear";
    case PatternKind::CellBubble: return "cell-bubble";
    case PatternKind::ColumnStrip: return "column-strip";
    case PatternKind::RowStrip: return "row-strip";
  }
  return "?";
}

int DofMap::local_size() const {
  switch (kind) {
    case SpaceKind::Q1: return 4;
    case SpaceKind::Wilson:
    case SpaceKind::WilsonBroken: return 6;
    case SpaceKind::RM: return 8;
    default: throw PreconditionError("no cell-local basis for this space kind");
  }
}

void DofMap::cell_dofs(int i, int j, int* out) const {
  const int vid[4] = {i + j * (m + 1), (i + 1) + j * (m + 1),
                      (i + 1) + (j + 1) * (m + 1), i + (j + 1) * (m + 1)};
  const int c = i + j * m;
  switch (kind) {
    case SpaceKind::Q1:
      for (int v = 0; v < 4; ++v) out[v] = vertex_dof[vid[v]];
      break;
    case SpaceKind::Wilson:
      for (int v = 0; v < 4; ++v) out[v] = vertex_dof[vid[v]];
      out[4] = cell_dof[c];
      out[5] = cell_dof[c] < 0 ? -1 : cell_dof[c] + 1;
      break;
    case SpaceKind::WilsonBroken:
      for (int k = 0; k < 6; ++k) out[k] = cell_dof[c] < 0 ? -1 : cell_dof[c] + k;
      break;
    case SpaceKind::RM:
      for (int v = 0; v < 4; ++v) out[v] = vertex_dof[vid[v]];
      out[4] = hedge_dof[i + j * m];
      out[5] = vedge_dof[(i + 1) + j * (m + 1)];
      out[6] = hedge_dof[i + (j + 1) * m];
      out[7] = vedge_dof[i + j * (m + 1)];
      break;
    default:
      throw PreconditionError("no cell-local dofs for this space kind");
  }
}

DofMap build_dof_map(SpaceKind kind, const RectGrid& g, bool homogeneous) {
  if (kind == SpaceKind::MC || kind == SpaceKind::RRM)
    throw PreconditionError("MC/RRM are carried by an explicit basis, not a dof map");
  EntityIndex idx(g);
  DofMap map;
  map.kind = kind;
  map.homogeneous = homogeneous;
  map.m = g.m;
  map.n = g.n;
  int next = 0;

  if (kind != SpaceKind::WilsonBroken) {
    map.vertex_dof.assign((g.m + 1) * (g.n + 1), -1);
    for (int j = 0; j <= g.n; ++j)
      for (int i = 0; i <= g.m; ++i) {
        const int v = idx.vertex_id(i, j);
        if (!idx.vertex_exists[v]) continue;
        if (homogeneous && !idx.vertex_interior[v]) continue;
        map.vertex_dof[v] = next++;
      }
  }

  if (kind == SpaceKind::Wilson || kind == SpaceKind::WilsonBroken) {
    const int per_cell = (kind == SpaceKind::Wilson) ? 2 : 6;
    map.cell_dof.assign(g.m * g.n, -1);
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.m; ++i)
        if (g.cell_active(i, j)) {
          map.cell_dof[g.cell_id(i, j)] = next;
          next += per_cell;
        }
  }

  if (kind == SpaceKind::RM) {
    map.hedge_dof.assign(g.m * (g.n + 1), -1);
    map.vedge_dof.assign((g.m + 1) * g.n, -1);
    for (int j = 0; j <= g.n; ++j)
      for (int i = 0; i < g.m; ++i)
        if (idx.hedge_exists[idx.hedge_id(i, j)]) map.hedge_dof[idx.hedge_id(i, j)] = next++;
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i <= g.m; ++i)
        if (idx.vedge_exists[idx.vedge_id(i, j)]) map.vedge_dof[idx.vedge_id(i, j)] = next++;
  }

  map.n_free = next;
  return map;
}

std::vector<LocalQuad> local_basis(const DofMap& map, const CellGeom& c) {
  switch (map.kind) {
    case SpaceKind::Q1: {
      auto w = wilson_basis(c);
      return {w.phi.begin(), w.phi.begin() + 4};
    }
    case SpaceKind::Wilson:
    case SpaceKind::WilsonBroken: {
      auto w = wilson_basis(c);
      return {w.phi.begin(), w.phi.end()};
    }
    case SpaceKind::RM: {
      auto b = rm_local_basis(c);
      return {b.begin(), b.end()};
    }
    default:
      throw PreconditionError("no cell-local basis for this space kind");
  }
}

ConstraintMatrix build_constraints_rrm(const RectGrid& g, const DofMap& wilson) {
  if (wilson.kind != SpaceKind::Wilson)
    throw PreconditionError("constraints require a Wilson dof map");
  EntityIndex idx(g);
  ConstraintMatrix out;
  std::vector<Eigen::Triplet<double>> trips;

  // mean of the coordinate-direction derivative of each local basis function
  // on one side of a cell, scattered with the given sign
  auto add_side = [&](int row, int ci, int cj, CellSide side, double sign) {
    const CellGeom geom = cell_geom(g, ci, cj);
    const auto basis = local_basis(wilson, geom);
    int dofs[6];
    wilson.cell_dofs(ci, cj, dofs);
    for (int b = 0; b < 6; ++b) {
      if (dofs[b] < 0) continue;
      const double v = edge_mean_coordinate_derivative(basis[b], side);
      if (v != 0.0) trips.emplace_back(row, dofs[b], sign * v);
    }
  };

  int row = 0;
  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      if (!idx.hedge_interior[idx.hedge_id(i, j)]) continue;
      add_side(row, i, j, CellSide::Bottom, 1.0);    // cell above, + side
      add_side(row, i, j - 1, CellSide::Top, -1.0);  // cell below
      out.rows.push_back({true, i, j});
      ++row;
    }
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i <= g.m; ++i) {
      if (!idx.vedge_interior[idx.vedge_id(i, j)]) continue;
      add_side(row, i, j, CellSide::Left, 1.0);       // cell right, + side
      add_side(row, i - 1, j, CellSide::Right, -1.0); // cell left
      out.rows.push_back({false, i, j});
      ++row;
    }

  out.B.resize(row, wilson.n_free);
  out.B.setFromTriplets(trips.begin(), trips.end());
  return out;
}

namespace {

// Patch of cells with the compatibility system of the edge-dof description:
// unknowns are vertex values strictly inside the patch, plus mean d/dx on
// vertical edges and mean d/dy on horizontal edges not forced to zero.
struct PatchSpec {
  int i0, i1, j0, j1;                        // inclusive cell ranges
  std::vector<int> forced_v, forced_h;       // forced-zero edge levels
};

struct PatchDofs {
  std::vector<int> vertex, hedge, vedge;     // entity id -> column or -1
  int count = 0;
};

bool contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

PatchDofs enumerate_patch_dofs(const RectGrid& g, const PatchSpec& p) {
  PatchDofs d;
  d.vertex.assign((g.m + 1) * (g.n + 1), -1);
  d.hedge.assign(g.m * (g.n + 1), -1);
  d.vedge.assign((g.m + 1) * g.n, -1);
  for (int j = p.j0 + 1; j <= p.j1; ++j)
    for (int i = p.i0 + 1; i <= p.i1; ++i) d.vertex[i + j * (g.m + 1)] = d.count++;
  for (int j = p.j0; j <= p.j1 + 1; ++j) {
    if (contains(p.forced_h, j)) continue;
    for (int i = p.i0; i <= p.i1; ++i) d.hedge[i + j * g.m] = d.count++;
  }
  for (int j = p.j0; j <= p.j1; ++j)
    for (int i = p.i0; i <= p.i1 + 1; ++i) {
      if (contains(p.forced_v, i)) continue;
      d.vedge[i + j * (g.m + 1)] = d.count++;
    }
  return d;
}

// Nullspace vector of the patch compatibility system; throws unless the
// nullspace is exactly one-dimensional.
Eigen::VectorXd solve_pattern(const RectGrid& g, const PatchSpec& p, const PatchDofs& d) {
  const int cells = (p.i1 - p.i0 + 1) * (p.j1 - p.j0 + 1);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * cells, d.count);
  int row = 0;
  for (int cj = p.j0; cj <= p.j1; ++cj)
    for (int ci = p.i0; ci <= p.i1; ++ci) {
      const double L = g.cell_width(ci), H = g.cell_height(cj);
      const int v1 = ci + cj * (g.m + 1), v2 = v1 + 1;
      const int v4 = ci + (cj + 1) * (g.m + 1), v3 = v4 + 1;
      auto add = [&](int r, int col, double val) {
        if (col >= 0) A(r, col) += val;
      };
      // (a3 - a4 + a2 - a1)/L = b1 + b3
      add(row, d.vertex[v3], 1.0 / L);
      add(row, d.vertex[v4], -1.0 / L);
      add(row, d.vertex[v2], 1.0 / L);
      add(row, d.vertex[v1], -1.0 / L);
      add(row, d.vedge[ci + cj * (g.m + 1)], -1.0);
      add(row, d.vedge[(ci + 1) + cj * (g.m + 1)], -1.0);
      ++row;
      // (a3 - a2 + a4 - a1)/H = b2 + b4
      add(row, d.vertex[v3], 1.0 / H);
      add(row, d.vertex[v2], -1.0 / H);
      add(row, d.vertex[v4], 1.0 / H);
      add(row, d.vertex[v1], -1.0 / H);
      add(row, d.hedge[ci + cj * g.m], -1.0);
      add(row, d.hedge[ci + (cj + 1) * g.m], -1.0);
      ++row;
    }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = 1e-9 * sv(0);
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k) rank += (sv(k) > tol);
  if (d.count - rank != 1)
    throw NumericalError("pattern patch nullspace dimension != 1 (got " +
                         std::to_string(d.count - rank) + ")");
  return svd.matrixV().col(d.count - 1);
}

// Convert a patch edge-dof vector to global Wilson coefficients.
void scatter_pattern(const RectGrid& g, const DofMap& wilson, const PatchSpec& p,
                     const PatchDofs& d, const Eigen::VectorXd& v, Eigen::VectorXd& out) {
  auto value = [&](const std::vector<int>& dofs, int id) {
    return dofs[id] >= 0 ? v(dofs[id]) : 0.0;
  };
  for (int j = p.j0 + 1; j <= p.j1; ++j)
    for (int i = p.i0 + 1; i <= p.i1; ++i) {
      const int vd = wilson.vertex_dof[i + j * (g.m + 1)];
      if (vd >= 0) out(vd) = value(d.vertex, i + j * (g.m + 1));
    }
  for (int cj = p.j0; cj <= p.j1; ++cj)
    for (int ci = p.i0; ci <= p.i1; ++ci) {
      const double L = g.cell_width(ci), H = g.cell_height(cj);
      const double b1 = value(d.vedge, ci + cj * (g.m + 1));
      const double b3 = value(d.vedge, (ci + 1) + cj * (g.m + 1));
      const double b2 = value(d.hedge, ci + cj * g.m);
      const double b4 = value(d.hedge, ci + (cj + 1) * g.m);
      const int cd = wilson.cell_dof[g.cell_id(ci, cj)];
      out(cd) = (b1 - b3) / (2.0 * L);       // coefficient of x(hx - x)
      out(cd + 1) = (b2 - b4) / (2.0 * H);   // coefficient of y(hy - y)
    }
}

Eigen::SparseVector<double> to_sparse(const Eigen::VectorXd& v) {
  Eigen::SparseVector<double> s(v.size());
  for (int k = 0; k < v.size(); ++k)
    if (v(k) != 0.0) s.insert(k) = v(k);
  return s;
}

void normalize_max_one(Eigen::VectorXd& v) {
  int best = 0;
  for (int k = 1; k < v.size(); ++k)
    if (std::abs(v(k)) > std::abs(v(best))) best = k;
  if (v(best) != 0.0) v /= v(best);
}

}  // namespace

ExplicitBasis build_rrm_basis(const RectGrid& g) {
  if (g.m < 2 || g.n < 2) throw PreconditionError("RRM basis requires m, n >= 2");
  if (g.active_cell_count() != g.m * g.n)
    throw PreconditionError("RRM basis requires a full rectangle (no mask)");

  ExplicitBasis basis;
  basis.space = SpaceKind::RRM;
  basis.map = build_dof_map(SpaceKind::Wilson, g, true);
  const int m = g.m, n = g.n;

  auto emit = [&](PatternKind kind, int pi, int pj, const PatchSpec& spec) {
    const PatchDofs dofs = enumerate_patch_dofs(g, spec);
    const Eigen::VectorXd v = solve_pattern(g, spec, dofs);
    Eigen::VectorXd global = Eigen::VectorXd::Zero(basis.map.n_free);
    scatter_pattern(g, basis.map, spec, dofs, v, global);
    normalize_max_one(global);
    basis.members.push_back({kind, pi, pj, to_sparse(global)});
  };

  // boundary-edge patterns (3x2 / 2x3 patches), 1-based anchor indices
  for (int i = 2; i <= m - 1; ++i)
    emit(PatternKind::BottomEdge, i, 1, {i - 2, i, 0, 1, {i - 2, i + 1}, {2}});
  for (int i = 2; i <= m - 1; ++i)
    emit(PatternKind::TopEdge, i, n, {i - 2, i, n - 2, n - 1, {i - 2, i + 1}, {n - 2}});
  for (int j = 2; j <= n - 1; ++j)
    emit(PatternKind::LeftEdge, 1, j, {0, 1, j - 2, j, {2}, {j - 2, j + 1}});
  for (int j = 2; j <= n - 1; ++j)
    emit(PatternKind::RightEdge, m, j, {m - 2, m - 1, j - 2, j, {m - 2}, {j - 2, j + 1}});
  // two column and two row patterns spanning a whole strip
  for (int i = m - 1; i <= m; ++i)
    emit(PatternKind::Column, i, 0, {i - 1, i - 1, 0, n - 1, {i - 1, i}, {}});
  for (int j = n - 1; j <= n; ++j)
    emit(PatternKind::Row, 0, j, {0, m - 1, j - 1, j - 1, {}, {j - 1, j}});
  // interior 3x3 cell patterns
  for (int j = 2; j <= n - 1; ++j)
    for (int i = 2; i <= m - 1; ++i)
      emit(PatternKind::InteriorCell, i, j,
           {i - 2, i, j - 2, j, {i - 2, i + 1}, {j - 2, j + 1}});
  // northeast 2x2 corner pattern
  emit(PatternKind::Corner, m - 1, n - 1, {m - 2, m - 1, n - 2, n - 1, {m - 2}, {n - 2}});

  if (basis.count() != m * n + 1)
    throw NumericalError("RRM basis count mismatch: got " + std::to_string(basis.count()) +
                         ", expected " + std::to_string(m * n + 1));
  return basis;
}

ExplicitBasis build_mc_basis(const RectGrid& g, bool homogeneous) {
  if (g.active_cell_count() != g.m * g.n)
    throw PreconditionError("MC basis requires a full rectangle (no mask)");
  const double c0 = GaussRule::get().theta1 * GaussRule::get().theta2;

  ExplicitBasis basis;
  basis.space = SpaceKind::MC;
  basis.map = build_dof_map(SpaceKind::WilsonBroken, g, false);
  EntityIndex idx(g);
  const int m = g.m, n = g.n;

  auto vertex_hat = [&](int vi, int vj) {
    Eigen::SparseVector<double> v(basis.map.n_free);
    for (int dj = -1; dj <= 0; ++dj)
      for (int di = -1; di <= 0; ++di) {
        const int ci = vi + di, cj = vj + dj;
        if (!g.cell_active(ci, cj)) continue;
        const int corner = (di == 0 ? (dj == 0 ? 0 : 3) : (dj == 0 ? 1 : 2));
        v.insert(basis.map.cell_dof[g.cell_id(ci, cj)] + corner) = 1.0;
      }
    return v;
  };
  auto bubble = [&](int ci, int cj) {
    const CellGeom geom = cell_geom(g, ci, cj);
    Eigen::SparseVector<double> v(basis.map.n_free);
    const int base = basis.map.cell_dof[g.cell_id(ci, cj)];
    for (int k = 0; k < 4; ++k) v.insert(base + k) = -c0;
    v.insert(base + 4) = 1.0 / (geom.hx * geom.hx);
    v.insert(base + 5) = 1.0 / (geom.hy * geom.hy);
    return v;
  };

  if (homogeneous) {
    for (int vj = 1; vj < n; ++vj)
      for (int vi = 1; vi < m; ++vi)
        basis.members.push_back({PatternKind::VertexBilinear, vi, vj, vertex_hat(vi, vj)});
    for (int cj = 0; cj < n; ++cj)
      for (int ci = 0; ci < m; ++ci)
        basis.members.push_back({PatternKind::CellBubble, ci + 1, cj + 1, bubble(ci, cj)});
  } else {
    for (int vj = 0; vj <= n; ++vj)
      for (int vi = 0; vi <= m; ++vi)
        basis.members.push_back({PatternKind::VertexBilinear, vi, vj, vertex_hat(vi, vj)});
    for (int cj = 0; cj < n; ++cj)
      for (int ci = 0; ci < m; ++ci) {
        if (ci == 0 && cj == 0) continue;  // dependent on the rest
        basis.members.push_back({PatternKind::CellBubble, ci + 1, cj + 1, bubble(ci, cj)});
      }
    for (int ci = 0; ci < m; ++ci) {
      Eigen::SparseVector<double> v(basis.map.n_free);
      for (int cj = 0; cj < n; ++cj) v.insert(basis.map.cell_dof[g.cell_id(ci, cj)] + 4) = 1.0;
      basis.members.push_back({PatternKind::ColumnStrip, ci + 1, 0, v});
    }
    for (int cj = 0; cj < n; ++cj) {
      Eigen::SparseVector<double> v(basis.map.n_free);
      for (int ci = 0; ci < m; ++ci) v.insert(basis.map.cell_dof[g.cell_id(ci, cj)] + 5) = 1.0;
      basis.members.push_back({PatternKind::RowStrip, 0, cj + 1, v});
    }
  }
  return basis;
}

SpMat ExplicitBasis::matrix() const {
  SpMat Z(map.n_free, count());
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < count(); ++c)
    for (Eigen::SparseVector<double>::InnerIterator it(members[c].coeffs); it; ++it)
      trips.emplace_back((int)it.index(), c, it.value());
  Z.setFromTriplets(trips.begin(), trips.end());
  return Z;
}

std::vector<LocalQuad> expand_to_cells(const RectGrid& g, const DofMap& map,
                                       const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != map.n_free) throw PreconditionError("coefficient vector size mismatch");
  std::vector<LocalQuad> cells(g.m * g.n);
  const int ls = map.local_size();
  std::vector<int> dofs(ls);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      const CellGeom geom = cell_geom(g, i, j);
      cells[g.cell_id(i, j)] = LocalQuad(geom);
      if (!g.cell_active(i, j)) continue;
      const auto basis = local_basis(map, geom);
      map.cell_dofs(i, j, dofs.data());
      LocalQuad& p = cells[g.cell_id(i, j)];
      for (int b = 0; b < ls; ++b)
        if (dofs[b] >= 0 && coeffs(dofs[b]) != 0.0) p += coeffs(dofs[b]) * basis[b];
    }
  return cells;
}

bool membership_rrm(const ConstraintMatrix& B, const Eigen::VectorXd& coeffs, double tol) {
  if (coeffs.size() != B.B.cols()) throw PreconditionError("coefficient vector size mismatch");
  if (B.B.rows() == 0) return true;
  const Eigen::VectorXd r = B.B * coeffs;
  double bmax = 0.0;
  for (int k = 0; k < B.B.outerSize(); ++k)
    for (SpMat::InnerIterator it(B.B, k); it; ++it) bmax = std::max(bmax, std::abs(it.value()));
  const double scale = std::max(1.0, bmax * coeffs.cwiseAbs().maxCoeff());
  return r.cwiseAbs().maxCoeff() <= tol * scale;
}

double ExactSequenceReport::max_violation() const {
  return std::max(std::max(max_nonlinear, max_ps_jump),
                  std::max(max_boundary_normal, max_divergence));
}

ExactSequenceReport verify_exact_sequence(const std::vector<LocalQuad>& cells,
                                          const RectGrid& g) {
  EntityIndex idx(g);
  ExactSequenceReport rep;

  // curl_h w = (dy w, -dx w), cellwise
  std::vector<LocalQuad> c1(cells.size()), c2(cells.size());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      if (!g.cell_active(i, j)) continue;
      const int c = g.cell_id(i, j);
      c1[c] = cells[c].dy();
      c2[c] = -1.0 * cells[c].dx();
      rep.max_nonlinear = std::max(rep.max_nonlinear, c1[c].max_nonlinear_coeff());
      rep.max_nonlinear = std::max(rep.max_nonlinear, c2[c].max_nonlinear_coeff());
      LocalQuad div = c1[c].dx();
      div += c2[c].dy();
      for (int k = 0; k < LocalQuad::kCoeffs; ++k)
        rep.max_divergence = std::max(rep.max_divergence, std::abs(div.coeff(k)));
    }

  for (int j = 0; j <= g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      const int e = idx.hedge_id(i, j);
      if (!idx.hedge_exists[e]) continue;
      if (idx.hedge_interior[e]) {
        const int below = g.cell_id(i, j - 1), above = g.cell_id(i, j);
        for (const auto* comp : {&c1, &c2}) {
          const double jump = edge_mean_value((*comp)[above], CellSide::Bottom) -
                              edge_mean_value((*comp)[below], CellSide::Top);
          rep.max_ps_jump = std::max(rep.max_ps_jump, std::abs(jump));
        }
      } else {
        // boundary horizontal edge: normal component is +-c2
        const bool above_active = g.cell_active(i, j);
        const int c = above_active ? g.cell_id(i, j) : g.cell_id(i, j - 1);
        const double mean =
            edge_mean_value(c2[c], above_active ? CellSide::Bottom : CellSide::Top);
        rep.max_boundary_normal = std::max(rep.max_boundary_normal, std::abs(mean));
      }
    }
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i <= g.m; ++i) {
      const int e = idx.vedge_id(i, j);
      if (!idx.vedge_exists[e]) continue;
      if (idx.vedge_interior[e]) {
        const int left = g.cell_id(i - 1, j), right = g.cell_id(i, j);
        for (const auto* comp : {&c1, &c2}) {
          const double jump = edge_mean_value((*comp)[right], CellSide::Left) -
                              edge_mean_value((*comp)[left], CellSide::Right);
          rep.max_ps_jump = std::max(rep.max_ps_jump, std::abs(jump));
        }
      } else {
        const bool right_active = g.cell_active(i, j);
        const int c = right_active ? g.cell_id(i, j) : g.cell_id(i - 1, j);
        const double mean =
            edge_mean_value(c1[c], right_active ? CellSide::Left : CellSide::Right);
        rep.max_boundary_normal = std::max(rep.max_boundary_normal, std::abs(mean));
      }
    }
  return rep;
}

ExactSequenceReport verify_exact_sequence(const ExplicitBasis& basis, const RectGrid& g) {
  if (basis.space != SpaceKind::RRM)
    throw PreconditionError("exact-sequence check applies to the RRM basis");
  ExactSequenceReport rep;
  for (const auto& member : basis.members) {
    const auto cells = expand_to_cells(g, basis.map, dense_coeffs(member.coeffs));
    const auto r = verify_exact_sequence(cells, g);
    rep.max_nonlinear = std::max(rep.max_nonlinear, r.max_nonlinear);
    rep.max_ps_jump = std::max(rep.max_ps_jump, r.max_ps_jump);
    rep.max_boundary_normal = std::max(rep.max_boundary_normal, r.max_boundary_normal);
    rep.max_divergence = std::max(rep.max_divergence, r.max_divergence);
  }
  return rep;
}

int numerical_rank(const Eigen::MatrixXd& A, double rel_tol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(rel_tol);
  return (int)qr.rank();
}

DimsReport compute_dims(const RectGrid& g) {
  DimsReport rep;
  rep.m = g.m;
  rep.n = g.n;
  const DofMap wilson = build_dof_map(SpaceKind::Wilson, g, true);
  rep.dim_wilson = wilson.n_free;
  const ConstraintMatrix B = build_constraints_rrm(g, wilson);
  rep.n_constraints = (int)B.B.rows();
  if ((long long)B.B.rows() * wilson.n_free > 40'000'000LL)
    throw PreconditionError("dims rank computation is limited to moderate grids");
  rep.rank = numerical_rank(Eigen::MatrixXd(B.B));
  rep.dim_rrm = rep.dim_wilson - rep.rank;
  if (g.active_cell_count() == g.m * g.n) {
    rep.dim_mc_hom = build_mc_basis(g, true).count();
    rep.dim_mc = build_mc_basis(g, false).count();
  } else {
    rep.dim_mc_hom = rep.dim_mc = -1;
  }
  return rep;
}

}  // namespace rrm
