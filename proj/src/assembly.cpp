#include "rrmfem/assembly.hpp"

#include <atomic>
#include <ostream>

#include <Eigen/SparseCore>

namespace rrm {

namespace {

struct CellRef {
  int i, j;
};

std::vector<CellRef> active_cells(const RectGrid& g) {
  std::vector<CellRef> cells;
  cells.reserve(g.active_cell_count());
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i)
      if (g.cell_active(i, j)) cells.push_back({i, j});
  return cells;
}

}  // namespace

AssembledSystem assemble(SpaceKind space, const RectGrid& g, const ScalarField& rho,
                         const ScalarField& f, bool homogeneous, Exec exec) {
  AssembledSystem sys;
  sys.space = space;
  sys.grid = g;

  const SpaceKind carrier = (space == SpaceKind::RRM)  ? SpaceKind::Wilson
                            : (space == SpaceKind::MC) ? SpaceKind::WilsonBroken
                                                       : space;
  sys.map = build_dof_map(carrier, g, homogeneous);

  const auto cells = active_cells(g);
  const int nc = (int)cells.size();
  const int ls = sys.map.local_size();
  const int block = ls * ls;

  std::vector<Eigen::Triplet<double>> kt(nc * block), mt(nc * block);
  std::vector<double> ft(nc * ls, 0.0);
  std::vector<int> fdof(nc * ls, -1);
  std::atomic<bool> bad_rho{false};

  auto cell_kernel = [&](int c) {
    const CellGeom geom = cell_geom(g, cells[c].i, cells[c].j);
    const auto basis = local_basis(sys.map, geom);
    LocalMatrices lm;
    try {
      lm = local_matrices(basis, geom, rho, f);
    } catch (const PreconditionError&) {
      bad_rho = true;
      for (int k = 0; k < block; ++k) kt[c * block + k] = mt[c * block + k] = {0, 0, 0.0};
      return;
    }
    std::vector<int> dofs(ls);
    sys.map.cell_dofs(cells[c].i, cells[c].j, dofs.data());
    for (int a = 0; a < ls; ++a) {
      fdof[c * ls + a] = dofs[a];
      ft[c * ls + a] = lm.load(a);
      for (int b = 0; b < ls; ++b) {
        const int slot = c * block + a * ls + b;
        if (dofs[a] >= 0 && dofs[b] >= 0) {
          kt[slot] = {dofs[a], dofs[b], lm.stiffness(a, b)};
          mt[slot] = {dofs[a], dofs[b], lm.mass(a, b)};
        } else {
          kt[slot] = mt[slot] = {0, 0, 0.0};
        }
      }
    }
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < nc; ++c) cell_kernel(c);
  } else {
    for (int c = 0; c < nc; ++c) cell_kernel(c);
  }
  if (bad_rho) throw PreconditionError("rho must be positive at quadrature nodes");

  sys.K.resize(sys.map.n_free, sys.map.n_free);
  sys.M.resize(sys.map.n_free, sys.map.n_free);
  sys.K.setFromTriplets(kt.begin(), kt.end());
  sys.M.setFromTriplets(mt.begin(), mt.end());
  sys.F = Eigen::VectorXd::Zero(sys.map.n_free);
  for (int k = 0; k < nc * ls; ++k)
    if (fdof[k] >= 0) sys.F(fdof[k]) += ft[k];

  if (space == SpaceKind::RRM) sys.B = build_constraints_rrm(g, sys.map);
  return sys;
}

ReducedSystem reduce(const AssembledSystem& sys, const ExplicitBasis& basis) {
  if (basis.map.n_free != sys.map.n_free || basis.map.kind != sys.map.kind)
    throw PreconditionError("basis does not match the assembled system's dof map");
  ReducedSystem red;
  red.Z = basis.matrix();
  const SpMat KZ = sys.K * red.Z;
  red.Kr = SpMat(red.Z.transpose()) * KZ;
  const SpMat MZ = sys.M * red.Z;
  red.Mr = SpMat(red.Z.transpose()) * MZ;
  red.Fr = red.Z.transpose() * sys.F;
  return red;
}

void write_coordinate(std::ostream& os, const SpMat& A) {
  char buf[96];
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", (long)it.row() + 1, (long)it.col() + 1,
                    it.value());
      os << buf;
    }
}

void write_coordinate(std::ostream& os, const Eigen::VectorXd& v) {
  char buf[64];
  for (int k = 0; k < v.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%d 1 %.17g\n", k + 1, v(k));
    os << buf;
  }
}

}  // namespace rrm
