#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrm {

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DomainKind { Rectangle, LShape };

/// Axis-aligned domain with lower-left corner at (x0, y0). For LShape the
/// upper-right quadrant of the bounding box is removed.
struct Domain {
  DomainKind kind = DomainKind::Rectangle;
  double x0 = 0.0, y0 = 0.0;
  double width = 1.0, height = 1.0;

  static Domain unit_square() { return {}; }
  static Domain rectangle(double w, double h, double ox = 0.0, double oy = 0.0) {
    return {DomainKind::Rectangle, ox, oy, w, h};
  }
  static Domain lshape(double w = 2.0, double h = 2.0) {
    return {DomainKind::LShape, 0.0, 0.0, w, h};
  }
};

/// Tensor-product rectangular grid with an activity mask per cell.
/// Cells are indexed (i, j) with 0 <= i < m, 0 <= j < n; cell (i, j) spans
/// [xs[i], xs[i+1]] x [ys[j], ys[j+1]]. Immutable after construction.
struct RectGrid {
  std::vector<double> xs, ys;      // strictly increasing, sizes m+1 and n+1
  std::vector<std::uint8_t> active;  // size m*n, index i + j*m
  int m = 0, n = 0;

  int cell_id(int i, int j) const { return i + j * m; }
  bool in_range(int i, int j) const { return i >= 0 && i < m && j >= 0 && j < n; }
  bool cell_active(int i, int j) const {
    return in_range(i, j) && active[cell_id(i, j)] != 0;
  }
  double cell_width(int i) const { return xs[i + 1] - xs[i]; }
  double cell_height(int j) const { return ys[j + 1] - ys[j]; }

  int active_cell_count() const;
  /// h := max over active cells of max(h_x, h_y)
  double max_h() const;
  double max_hx() const;
  double max_hy() const;
};

/// Entity enumeration and interior/boundary classification for a grid.
/// Vertices: id = i + j*(m+1), 0 <= i <= m, 0 <= j <= n.
/// Horizontal edges (tangent +x): id = i + j*m, 0 <= i < m, 0 <= j <= n.
/// Vertical edges (tangent +y): id = i + j*(m+1), 0 <= i <= m, 0 <= j < n.
/// An entity exists iff it touches an active cell; it is interior iff all
/// incident cell slots are active (two for edges, four for vertices).
struct EntityIndex {
  int m = 0, n = 0;
  std::vector<std::uint8_t> vertex_exists, vertex_interior;
  std::vector<std::uint8_t> hedge_exists, hedge_interior;
  std::vector<std::uint8_t> vedge_exists, vedge_interior;

  explicit EntityIndex(const RectGrid& g);

  int vertex_id(int i, int j) const { return i + j * (m + 1); }
  int hedge_id(int i, int j) const { return i + j * m; }
  int vedge_id(int i, int j) const { return i + j * (m + 1); }

  int count_vertices() const;
  int count_interior_vertices() const;
  int count_boundary_vertices() const;
  int count_edges() const;
  int count_interior_edges() const;
  int count_boundary_edges() const;
};

RectGrid build_uniform(int m, int n, const Domain& domain);

/// Unit-square grid tiled by a 2x2 macro pattern with 0.35/0.65 interval
/// fractions in each direction; level l uses 2^(l-1) tiles per direction, so
/// the mesh size halves per level while neighbouring cells keep unequal
/// sizes at every scale.
RectGrid build_nonuniform_pattern(int levels);

/// Bisect every breakpoint interval; the active footprint is inherited.
RectGrid refine(const RectGrid& g);

/// True iff the grid is the double bisection of the coarse grid implied by
/// every 4th breakpoint (m and n divisible by 4).
bool satisfies_rt(const RectGrid& g);

}  // namespace rrm
