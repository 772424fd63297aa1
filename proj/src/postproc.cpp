#include "rrmfem/postproc.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace rrm {

DiscreteField expand_solution(const RectGrid& g, const DofMap& map,
                              const Eigen::VectorXd& coeffs) {
  return {g, expand_to_cells(g, map, coeffs)};
}

DiscreteField expand_reduced_solution(const RectGrid& g, const DofMap& map,
                                      const ReducedSystem& red, const Eigen::VectorXd& c) {
  return expand_solution(g, map, Eigen::VectorXd(red.Z * c));
}

Norms error_norms(const DiscreteField& uh, const ScalarField& u, const VectorField& grad_u,
                  const ScalarField& rho, Exec exec) {
  const RectGrid& g = uh.grid;
  const auto& gr = GaussRule::get();
  const int nc = g.m * g.n;
  std::vector<double> e_cell(nc, 0.0), l_cell(nc, 0.0);

  auto kernel = [&](int c) {
    const int i = c % g.m, j = c / g.m;
    if (!g.cell_active(i, j)) return;
    const CellGeom geom = cell_geom(g, i, j);
    const LocalQuad& p = uh.cells[c];
    double ee = 0.0, ll = 0.0;
    for (int qj = 0; qj < 4; ++qj)
      for (int qi = 0; qi < 4; ++qi) {
        const double x = geom.xc() + 0.5 * geom.hx * gr.nodes[qi];
        const double y = geom.yc() + 0.5 * geom.hy * gr.nodes[qj];
        const double w = gr.weights[qi] * gr.weights[qj] * 0.25 * geom.hx * geom.hy;
        const Eigen::Vector2d dg = grad_u(x, y) - p.grad(x, y);
        const double dv = u(x, y) - p.eval(x, y);
        ee += w * dg.squaredNorm();
        ll += w * rho(x, y) * dv * dv;
      }
    e_cell[c] = ee;
    l_cell[c] = ll;
  };

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < nc; ++c) kernel(c);
  } else {
    for (int c = 0; c < nc; ++c) kernel(c);
  }

  Norms out;
  double se = 0.0, sl = 0.0;
  for (int c = 0; c < nc; ++c) {
    se += e_cell[c];
    sl += l_cell[c];
  }
  out.energy = std::sqrt(se);
  out.l2 = std::sqrt(sl);
  return out;
}

double broken_energy_distance(const DiscreteField& a, const DiscreteField& b) {
  const RectGrid& g = a.grid;
  if (b.grid.m != g.m || b.grid.n != g.n)
    throw PreconditionError("fields live on different grids");
  const auto& gr = GaussRule::get();
  double total = 0.0;
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.m; ++i) {
      if (!g.cell_active(i, j)) continue;
      const CellGeom geom = cell_geom(g, i, j);
      const LocalQuad d = a.cells[g.cell_id(i, j)] - b.cells[g.cell_id(i, j)];
      for (int qj = 0; qj < 4; ++qj)
        for (int qi = 0; qi < 4; ++qi) {
          const double x = geom.xc() + 0.5 * geom.hx * gr.nodes[qi];
          const double y = geom.yc() + 0.5 * geom.hy * gr.nodes[qj];
          const double w = gr.weights[qi] * gr.weights[qj] * 0.25 * geom.hx * geom.hy;
          total += w * d.grad(x, y).squaredNorm();
        }
    }
  return std::sqrt(total);
}

double broken_energy_norm(const DiscreteField& a) {
  DiscreteField zero{a.grid, std::vector<LocalQuad>(a.cells.size())};
  for (size_t c = 0; c < a.cells.size(); ++c) zero.cells[c] = LocalQuad(a.cells[c].geom());
  return broken_energy_distance(a, zero);
}

void fill_eoc(ErrorReport& rep) {
  for (size_t l = 0; l < rep.rows.size(); ++l) {
    if (l == 0) {
      rep.rows[l].eoc_energy = rep.rows[l].eoc_l2 = 0.0;
      continue;
    }
    const auto& a = rep.rows[l - 1];
    auto& b = rep.rows[l];
    const double dh = std::log(a.h / b.h);
    b.eoc_energy = std::log(a.energy / b.energy) / dh;
    b.eoc_l2 = std::log(a.l2 / b.l2) / dh;
  }
}

LowerBoundReport lower_bound_report(const std::vector<EigenLevel>& levels,
                                    const std::vector<double>& lambda_exact) {
  if (levels.size() < 2) throw PreconditionError("lower-bound report needs at least 2 levels");
  LowerBoundReport rep;
  const int k = (int)lambda_exact.size();
  for (int j = 0; j < k; ++j) {
    LowerBoundColumn col;
    col.j = j + 1;
    double prev = -1e300;
    for (const auto& lvl : levels) {
      const double lh = lvl.lambdas.at(j);
      const double gap = lambda_exact[j] - lh;
      col.gaps.push_back(gap);
      col.scaled_gap.push_back(gap / (lvl.h * lvl.h));
      if (gap == 0.0) col.degenerate_exact = true;
      if (gap < 0.0) col.below_exact = false;
      if (lh < prev) col.monotone = false;
      prev = lh;
    }
    for (size_t l = 0; l + 1 < levels.size(); ++l) {
      const double dh = std::log(levels[l].h / levels[l + 1].h);
      const double g0 = col.gaps[l], g1 = col.gaps[l + 1];
      col.eoc.push_back((g0 > 0 && g1 > 0) ? std::log(g0 / g1) / dh : 0.0);
    }
    rep.columns.push_back(std::move(col));
  }
  return rep;
}

L2LowerBoundReport l2_lower_bound_check(const ErrorReport& rep, bool f_nonzero) {
  L2LowerBoundReport out;
  if (!f_nonzero) {
    out.skipped = true;
    return out;
  }
  for (const auto& row : rep.rows) out.ratio.push_back(row.l2 / (row.h * row.h));
  if (out.ratio.size() < 3) throw PreconditionError("L2 lower-bound check needs >= 3 levels");
  double lo = 1e300, hi = 0.0;
  for (size_t l = out.ratio.size() - 3; l < out.ratio.size(); ++l) {
    lo = std::min(lo, out.ratio[l]);
    hi = std::max(hi, out.ratio[l]);
  }
  out.min_max_ratio = lo / hi;
  out.pass = out.min_max_ratio > 0.2;
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

void write_error_csv(std::ostream& os, const ErrorReport& rep) {
  os << "level,h,hx,energy_err,l2_err,eoc_energy,eoc_l2\n";
  for (const auto& r : rep.rows) {
    os << r.level << ',' << fmt(r.h) << ',' << fmt(r.hx) << ',' << fmt(r.energy) << ','
       << fmt(r.l2) << ',';
    if (r.level > 1) os << fmt(r.eoc_energy);
    os << ',';
    if (r.level > 1) os << fmt(r.eoc_l2);
    os << '\n';
  }
}

void write_error_json(std::ostream& os, const ErrorReport& rep) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    nlohmann::ordered_json row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["hx"] = r.hx;
    row["energy_err"] = r.energy;
    row["l2_err"] = r.l2;
    if (r.level > 1) {
      row["eoc_energy"] = r.eoc_energy;
      row["eoc_l2"] = r.eoc_l2;
    }
    j.push_back(row);
  }
  os << j.dump(2) << "\n";
}

void write_eigen_csv(std::ostream& os, const std::vector<EigenLevel>& levels,
                     const std::vector<double>* lambda_exact) {
  size_t k = 0;
  for (const auto& l : levels) k = std::max(k, l.lambdas.size());
  os << "level,h,hx";
  for (size_t j = 1; j <= k; ++j) os << ",lambda" << j;
  for (size_t j = 1; j <= k; ++j) os << ",order" << j;
  os << '\n';
  for (size_t l = 0; l < levels.size(); ++l) {
    const auto& row = levels[l];
    os << row.level << ',' << fmt(row.h) << ',' << fmt(row.hx);
    for (size_t j = 0; j < k; ++j) os << ',' << fmt(row.lambdas.at(j));
    for (size_t j = 0; j < k; ++j) {
      os << ',';
      if (l == 0 || !lambda_exact || j >= lambda_exact->size()) continue;
      const double g0 = (*lambda_exact)[j] - levels[l - 1].lambdas.at(j);
      const double g1 = (*lambda_exact)[j] - levels[l].lambdas.at(j);
      if (g0 > 0.0 && g1 > 0.0)
        os << fmt(std::log(g0 / g1) / std::log(levels[l - 1].h / levels[l].h));
    }
    os << '\n';
  }
}

void write_eigen_json(std::ostream& os, const std::vector<EigenLevel>& levels,
                      const std::vector<double>* lambda_exact) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& row : levels) {
    nlohmann::ordered_json r;
    r["level"] = row.level;
    r["h"] = row.h;
    r["hx"] = row.hx;
    r["lambdas"] = row.lambdas;
    j.push_back(r);
  }
  if (lambda_exact) {
    nlohmann::ordered_json out;
    out["levels"] = j;
    out["lambda_exact"] = *lambda_exact;
    os << out.dump(2) << "\n";
  } else {
    os << j.dump(2) << "\n";
  }
}

}  // namespace rrm
