#include "rrmfem/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace rrm {

int RectGrid::active_cell_count() const {
  int c = 0;
  for (auto a : active) c += (a != 0);
  return c;
}

double RectGrid::max_h() const {
  double h = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (cell_active(i, j)) h = std::max(h, std::max(cell_width(i), cell_height(j)));
  return h;
}

double RectGrid::max_hx() const {
  double h = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (cell_active(i, j)) h = std::max(h, cell_width(i));
  return h;
}

double RectGrid::max_hy() const {
  double h = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (cell_active(i, j)) h = std::max(h, cell_height(j));
  return h;
}

namespace {

void validate(const RectGrid& g) {
  if (g.m < 1 || g.n < 1) throw PreconditionError("grid must have at least one cell per direction");
  if ((int)g.xs.size() != g.m + 1 || (int)g.ys.size() != g.n + 1)
    throw PreconditionError("breakpoint array sizes do not match cell counts");
  for (int i = 0; i < g.m; ++i)
    if (!(g.xs[i + 1] > g.xs[i])) throw PreconditionError("xs must be strictly increasing");
  for (int j = 0; j < g.n; ++j)
    if (!(g.ys[j + 1] > g.ys[j])) throw PreconditionError("ys must be strictly increasing");
  if ((int)g.active.size() != g.m * g.n) throw PreconditionError("active mask size mismatch");
  if (g.active_cell_count() == 0) throw PreconditionError("grid has no active cells");
}

std::vector<double> uniform_breaks(double a, double w, int k) {
  std::vector<double> xs(k + 1);
  for (int i = 0; i <= k; ++i) xs[i] = a + w * i / k;
  return xs;
}

}  // namespace

RectGrid build_uniform(int m, int n, const Domain& domain) {
  if (m < 1 || n < 1) throw PreconditionError("cell counts must be positive");
  RectGrid g;
  g.m = m;
  g.n = n;
  g.xs = uniform_breaks(domain.x0, domain.width, m);
  g.ys = uniform_breaks(domain.y0, domain.height, n);
  g.active.assign(m * n, 1);
  if (domain.kind == DomainKind::LShape) {
    if (m % 2 != 0 || n % 2 != 0)
      throw PreconditionError("L-shape requires even cell counts");
    for (int j = n / 2; j < n; ++j)
      for (int i = m / 2; i < m; ++i) g.active[g.cell_id(i, j)] = 0;
  }
  validate(g);
  return g;
}

RectGrid build_nonuniform_pattern(int levels) {
  if (levels < 1) throw PreconditionError("levels must be >= 1");
  // 2^(levels-1) scaled copies of the 0.35/0.65 macro pattern per direction,
  // so unequal neighbours occur at every scale and the mesh size halves per
  // level
  const int tiles = 1 << (levels - 1);
  RectGrid g;
  g.m = g.n = 2 * tiles;
  auto breaks = [&](std::vector<double>& xs) {
    xs.clear();
    for (int t = 0; t < tiles; ++t) {
      xs.push_back((double)t / tiles);
      xs.push_back((t + 0.35) / tiles);
    }
    xs.push_back(1.0);
  };
  breaks(g.xs);
  breaks(g.ys);
  g.active.assign(g.m * g.n, 1);
  return g;
}

RectGrid refine(const RectGrid& g) {
  validate(g);
  RectGrid r;
  r.m = 2 * g.m;
  r.n = 2 * g.n;
  r.xs.resize(r.m + 1);
  r.ys.resize(r.n + 1);
  for (int i = 0; i < g.m; ++i) {
    r.xs[2 * i] = g.xs[i];
    r.xs[2 * i + 1] = 0.5 * (g.xs[i] + g.xs[i + 1]);
  }
  r.xs[r.m] = g.xs[g.m];
  for (int j = 0; j < g.n; ++j) {
    r.ys[2 * j] = g.ys[j];
    r.ys[2 * j + 1] = 0.5 * (g.ys[j] + g.ys[j + 1]);
  }
  r.ys[r.n] = g.ys[g.n];
  r.active.assign(r.m * r.n, 0);
  for (int j = 0; j < r.n; ++j)
    for (int i = 0; i < r.m; ++i)
      r.active[r.cell_id(i, j)] = g.active[g.cell_id(i / 2, j / 2)];
  return r;
}

namespace {

bool is_double_bisection(const std::vector<double>& xs) {
  const int m = (int)xs.size() - 1;
  if (m % 4 != 0) return false;
  const double span = xs.back() - xs.front();
  for (int k = 0; k + 4 <= m; k += 4) {
    const double a = xs[k], b = xs[k + 4];
    for (int r = 1; r < 4; ++r)
      if (std::abs(xs[k + r] - (a + (b - a) * r / 4.0)) > 1e-12 * span) return false;
  }
  return true;
}

}  // namespace

bool satisfies_rt(const RectGrid& g) {
  return is_double_bisection(g.xs) && is_double_bisection(g.ys);
}

EntityIndex::EntityIndex(const RectGrid& g) : m(g.m), n(g.n) {
  vertex_exists.assign((m + 1) * (n + 1), 0);
  vertex_interior.assign((m + 1) * (n + 1), 0);
  hedge_exists.assign(m * (n + 1), 0);
  hedge_interior.assign(m * (n + 1), 0);
  vedge_exists.assign((m + 1) * n, 0);
  vedge_interior.assign((m + 1) * n, 0);

  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= m; ++i) {
      const bool c00 = g.cell_active(i - 1, j - 1), c10 = g.cell_active(i, j - 1);
      const bool c01 = g.cell_active(i - 1, j), c11 = g.cell_active(i, j);
      const int v = vertex_id(i, j);
      vertex_exists[v] = c00 || c10 || c01 || c11;
      vertex_interior[v] = c00 && c10 && c01 && c11;
    }
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < m; ++i) {
      const bool below = g.cell_active(i, j - 1), above = g.cell_active(i, j);
      const int e = hedge_id(i, j);
      hedge_exists[e] = below || above;
      hedge_interior[e] = below && above;
    }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= m; ++i) {
      const bool left = g.cell_active(i - 1, j), right = g.cell_active(i, j);
      const int e = vedge_id(i, j);
      vedge_exists[e] = left || right;
      vedge_interior[e] = left && right;
    }
}

namespace {
int count_set(const std::vector<std::uint8_t>& v) {
  int c = 0;
  for (auto x : v) c += (x != 0);
  return c;
}
}  // namespace

int EntityIndex::count_vertices() const { return count_set(vertex_exists); }
int EntityIndex::count_interior_vertices() const { return count_set(vertex_interior); }
int EntityIndex::count_boundary_vertices() const {
  return count_vertices() - count_interior_vertices();
}
int EntityIndex::count_edges() const {
  return count_set(hedge_exists) + count_set(vedge_exists);
}
int EntityIndex::count_interior_edges() const {
  return count_set(hedge_interior) + count_set(vedge_interior);
}
int EntityIndex::count_boundary_edges() const {
  return count_edges() - count_interior_edges();
}

}  // namespace rrm
