#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rrmfem/mesh.hpp"

namespace rrm {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Eigen::Vector2d(double, double)>;

/// Geometry of one rectangular cell: lower-left corner and side lengths.
struct CellGeom {
  double x0 = 0.0, y0 = 0.0;
  double hx = 1.0, hy = 1.0;

  double xc() const { return x0 + 0.5 * hx; }
  double yc() const { return y0 + 0.5 * hy; }
};

inline CellGeom cell_geom(const RectGrid& g, int i, int j) {
  return {g.xs[i], g.ys[j], g.cell_width(i), g.cell_height(j)};
}

/// Sides of a cell, counterclockwise from the bottom.
enum class CellSide { Bottom = 0, Right = 1, Top = 2, Left = 3 };

/// Polynomial on one cell stored over scaled center coordinates
/// X = 2(x - xc)/hx, Y = 2(y - yc)/hy in [-1,1]. Monomial order:
/// 1, X, Y, X^2, XY, Y^2, X^3, Y^3 (the last two enrich the RM space).
class LocalQuad {
 public:
  static constexpr int kCoeffs = 8;

  LocalQuad() = default;
  explicit LocalQuad(const CellGeom& geom) : geom_(geom) {}

  const CellGeom& geom() const { return geom_; }
  double& coeff(int k) { return c_[k]; }
  double coeff(int k) const { return c_[k]; }

  double eval(double x, double y) const;
  Eigen::Vector2d grad(double x, double y) const;

  /// Partial derivatives as polynomials on the same cell.
  LocalQuad dx() const;
  LocalQuad dy() const;

  LocalQuad& operator+=(const LocalQuad& o);
  LocalQuad& operator*=(double s);
  friend LocalQuad operator*(double s, LocalQuad p) { return p *= s; }
  friend LocalQuad operator-(LocalQuad a, const LocalQuad& b);

  /// Largest |coefficient| among total-degree >= 2 terms (X^2, XY, Y^2, X^3, Y^3).
  double max_nonlinear_coeff() const;

 private:
  std::array<double, kCoeffs> c_{};
  CellGeom geom_;
};

/// Second-order Gauss-Legendre data: theta1/theta2 on [0,1] and the 4x4
/// tensor rule on [-1,1]^2 used for all cell integrals (exact to degree 7).
struct GaussRule {
  double theta1, theta2;
  std::array<double, 4> nodes, weights;  // 1D 4-point rule on [-1,1]
  std::array<double, 2> nodes2, weights2;  // 1D 2-point rule on [-1,1]

  static const GaussRule& get();
};

/// Physical coordinates of the two Gauss points of an edge, ordered per the
/// g_{i1}/g_{i2} convention: counterclockwise along the cell boundary.
std::array<Eigen::Vector2d, 2> edge_gauss_points(const CellGeom& c, CellSide side);
Eigen::Vector2d edge_midpoint(const CellGeom& c, CellSide side);

/// The six local functions of P2(K): four bilinear vertex functions
/// (a1 lower-left, counterclockwise) and the two directional bubbles
/// x(hx - x), y(hy - y) in cell-local physical coordinates.
struct WilsonBasis {
  std::array<LocalQuad, 6> phi;  // a1, a2, a3, a4, xx, yy
};

WilsonBasis wilson_basis(const CellGeom& c);

/// P2 bubble vanishing at the eight boundary Gauss points:
/// phi_xx/hx^2 + phi_yy/hy^2 - theta1*theta2.
LocalQuad bubble_phi0(const CellGeom& c);

/// Values at the 8 boundary Gauss points ordered g11,g12,g21,g22,g31,g32,
/// g41,g42 (counterclockwise: bottom, right, top, left). True iff the three
/// P2-trace compatibility conditions hold within tol * max|g|.
bool check_compat_mc(const std::array<double, 8>& gvals, const CellGeom& c,
                     double tol = 1e-10);

/// Vertex values alpha (a1..a4 counterclockwise from lower-left) and edge
/// means beta of the coordinate-direction derivatives: d/dx on the left and
/// right sides, d/dy on the bottom and top (beta1 left, beta2 bottom,
/// beta3 right, beta4 top). True iff both P2 compatibility conditions hold.
bool check_compat_rrm(const std::array<double, 4>& alphas,
                      const std::array<double, 4>& betas, double L, double H,
                      double tol = 1e-10);

/// Mean over the edge of the outward normal derivative of p (2-point Gauss,
/// exact for the quadratic derivative traces occurring here).
double edge_mean_normal_derivative(const LocalQuad& p, CellSide side);

/// Mean over the edge of the coordinate-direction derivative: d/dx on
/// vertical sides, d/dy on horizontal sides.
double edge_mean_coordinate_derivative(const LocalQuad& p, CellSide side);

/// Mean over the edge of the polynomial itself.
double edge_mean_value(const LocalQuad& p, CellSide side);

/// Local stiffness, mass (weighted by rho) and load (rho * f) over a basis.
struct LocalMatrices {
  Eigen::MatrixXd stiffness, mass;
  Eigen::VectorXd load;
};

LocalMatrices local_matrices(const std::vector<LocalQuad>& basis, const CellGeom& c,
                             const ScalarField& rho, const ScalarField& f);

/// Nodal basis of P2 + span{x^3, y^3} dual to the RM degrees of freedom:
/// values at a1..a4 followed by edge means of d/dy (bottom), d/dx (right),
/// d/dy (top), d/dx (left).
std::array<LocalQuad, 8> rm_local_basis(const CellGeom& c);

/// Condition number of the 8x8 RM degree-of-freedom matrix on this cell.
double rm_dof_condition(const CellGeom& c);

}  // namespace rrm
