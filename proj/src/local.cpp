#include "rrmfem/local.hpp"

#include <cmath>

namespace rrm {

double LocalQuad::eval(double x, double y) const {
  const double X = 2.0 * (x - geom_.xc()) / geom_.hx;
  const double Y = 2.0 * (y - geom_.yc()) / geom_.hy;
  return c_[0] + c_[1] * X + c_[2] * Y + c_[3] * X * X + c_[4] * X * Y +
         c_[5] * Y * Y + c_[6] * X * X * X + c_[7] * Y * Y * Y;
}

Eigen::Vector2d LocalQuad::grad(double x, double y) const {
  const double X = 2.0 * (x - geom_.xc()) / geom_.hx;
  const double Y = 2.0 * (y - geom_.yc()) / geom_.hy;
  const double gX = c_[1] + 2.0 * c_[3] * X + c_[4] * Y + 3.0 * c_[6] * X * X;
  const double gY = c_[2] + c_[4] * X + 2.0 * c_[5] * Y + 3.0 * c_[7] * Y * Y;
  return {gX * 2.0 / geom_.hx, gY * 2.0 / geom_.hy};
}

LocalQuad LocalQuad::dx() const {
  LocalQuad d(geom_);
  const double s = 2.0 / geom_.hx;
  d.c_[0] = s * c_[1];
  d.c_[1] = s * 2.0 * c_[3];
  d.c_[2] = s * c_[4];
  d.c_[3] = s * 3.0 * c_[6];
  return d;
}

LocalQuad LocalQuad::dy() const {
  LocalQuad d(geom_);
  const double s = 2.0 / geom_.hy;
  d.c_[0] = s * c_[2];
  d.c_[1] = s * c_[4];
  d.c_[2] = s * 2.0 * c_[5];
  d.c_[5] = s * 3.0 * c_[7];
  return d;
}

LocalQuad& LocalQuad::operator+=(const LocalQuad& o) {
  for (int k = 0; k < kCoeffs; ++k) c_[k] += o.c_[k];
  return *this;
}

LocalQuad& LocalQuad::operator*=(double s) {
  for (int k = 0; k < kCoeffs; ++k) c_[k] *= s;
  return *this;
}

LocalQuad operator-(LocalQuad a, const LocalQuad& b) {
  for (int k = 0; k < LocalQuad::kCoeffs; ++k) a.c_[k] -= b.c_[k];
  return a;
}

double LocalQuad::max_nonlinear_coeff() const {
  double v = 0.0;
  for (int k : {3, 4, 5, 6, 7}) v = std::max(v, std::abs(c_[k]));
  return v;
}

const GaussRule& GaussRule::get() {
  static const GaussRule rule = [] {
    GaussRule r;
    const double c = 0.5 / std::sqrt(3.0);
    r.theta1 = 0.5 - c;
    r.theta2 = 0.5 + c;
    const double a = std::sqrt(6.0 / 5.0);
    const double n1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * a);
    const double n2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * a);
    const double w1 = (18.0 + std::sqrt(30.0)) / 36.0;
    const double w2 = (18.0 - std::sqrt(30.0)) / 36.0;
    r.nodes = {-n2, -n1, n1, n2};
    r.weights = {w2, w1, w1, w2};
    r.nodes2 = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
    r.weights2 = {1.0, 1.0};
    return r;
  }();
  return rule;
}

std::array<Eigen::Vector2d, 2> edge_gauss_points(const CellGeom& c, CellSide side) {
  const auto& gr = GaussRule::get();
  const double t1 = gr.theta1, t2 = gr.theta2;
  switch (side) {
    case CellSide::Bottom:
      return {Eigen::Vector2d(c.x0 + t1 * c.hx, c.y0), Eigen::Vector2d(c.x0 + t2 * c.hx, c.y0)};
    case CellSide::Right:
      return {Eigen::Vector2d(c.x0 + c.hx, c.y0 + t1 * c.hy),
              Eigen::Vector2d(c.x0 + c.hx, c.y0 + t2 * c.hy)};
    case CellSide::Top:
      return {Eigen::Vector2d(c.x0 + t2 * c.hx, c.y0 + c.hy),
              Eigen::Vector2d(c.x0 + t1 * c.hx, c.y0 + c.hy)};
    case CellSide::Left:
    default:
      return {Eigen::Vector2d(c.x0, c.y0 + t2 * c.hy), Eigen::Vector2d(c.x0, c.y0 + t1 * c.hy)};
  }
}

Eigen::Vector2d edge_midpoint(const CellGeom& c, CellSide side) {
  switch (side) {
    case CellSide::Bottom: return {c.xc(), c.y0};
    case CellSide::Right: return {c.x0 + c.hx, c.yc()};
    case CellSide::Top: return {c.xc(), c.y0 + c.hy};
    case CellSide::Left:
    default: return {c.x0, c.yc()};
  }
}

WilsonBasis wilson_basis(const CellGeom& c) {
  if (!(c.hx > 0.0) || !(c.hy > 0.0)) throw PreconditionError("degenerate cell");
  WilsonBasis b;
  for (auto& p : b.phi) p = LocalQuad(c);
  // bilinear vertex functions (1 +- X)(1 +- Y)/4
  const double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  for (int v = 0; v < 4; ++v) {
    b.phi[v].coeff(0) = 0.25;
    b.phi[v].coeff(1) = 0.25 * sx[v];
    b.phi[v].coeff(2) = 0.25 * sy[v];
    b.phi[v].coeff(4) = 0.25 * sx[v] * sy[v];
  }
  // phi_xx = x(hx - x) and phi_yy = y(hy - y), x measured from the corner
  b.phi[4].coeff(0) = 0.25 * c.hx * c.hx;
  b.phi[4].coeff(3) = -0.25 * c.hx * c.hx;
  b.phi[5].coeff(0) = 0.25 * c.hy * c.hy;
  b.phi[5].coeff(5) = -0.25 * c.hy * c.hy;
  return b;
}

LocalQuad bubble_phi0(const CellGeom& c) {
  const auto& gr = GaussRule::get();
  LocalQuad p(c);
  p.coeff(0) = 0.5 - gr.theta1 * gr.theta2;
  p.coeff(3) = -0.25;
  p.coeff(5) = -0.25;
  return p;
}

bool check_compat_mc(const std::array<double, 8>& g, const CellGeom&, double tol) {
  const auto& gr = GaussRule::get();
  const double t1 = gr.theta1, t2 = gr.theta2;
  const double c1 = g[0] - g[1] + g[2] - g[3] + g[4] - g[5] + g[6] - g[7];
  const double c2 = t1 * (g[0] - g[5]) + t2 * (g[4] - g[1]) + (g[2] - g[3]);
  const double c3 = t1 * (g[0] - g[1]) + (t2 - t1) * (g[3] - g[6]) + t2 * (g[5] - g[4]);
  double scale = 0.0;
  for (double v : g) scale = std::max(scale, std::abs(v));
  const double bound = tol * scale;
  return std::abs(c1) <= bound && std::abs(c2) <= bound && std::abs(c3) <= bound;
}

bool check_compat_rrm(const std::array<double, 4>& a, const std::array<double, 4>& b,
                      double L, double H, double tol) {
  if (!(L > 0.0) || !(H > 0.0)) throw PreconditionError("degenerate cell");
  const double r1 = (a[2] - a[3]) / L + (a[1] - a[0]) / L - (b[0] + b[2]);
  const double r2 = (a[2] - a[1]) / H + (a[3] - a[0]) / H - (b[1] + b[3]);
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (double v : b) scale = std::max(scale, std::abs(v));
  const double bound = tol * scale;
  return std::abs(r1) <= bound && std::abs(r2) <= bound;
}

double edge_mean_coordinate_derivative(const LocalQuad& p, CellSide side) {
  const bool horizontal = (side == CellSide::Bottom || side == CellSide::Top);
  const LocalQuad d = horizontal ? p.dy() : p.dx();
  const auto pts = edge_gauss_points(p.geom(), side);
  return 0.5 * (d.eval(pts[0].x(), pts[0].y()) + d.eval(pts[1].x(), pts[1].y()));
}

double edge_mean_normal_derivative(const LocalQuad& p, CellSide side) {
  const double sgn = (side == CellSide::Bottom || side == CellSide::Left) ? -1.0 : 1.0;
  return sgn * edge_mean_coordinate_derivative(p, side);
}

double edge_mean_value(const LocalQuad& p, CellSide side) {
  const auto pts = edge_gauss_points(p.geom(), side);
  return 0.5 * (p.eval(pts[0].x(), pts[0].y()) + p.eval(pts[1].x(), pts[1].y()));
}

LocalMatrices local_matrices(const std::vector<LocalQuad>& basis, const CellGeom& c,
                             const ScalarField& rho, const ScalarField& f) {
  const int k = (int)basis.size();
  const auto& gr = GaussRule::get();
  LocalMatrices out;
  out.stiffness = Eigen::MatrixXd::Zero(k, k);
  out.mass = Eigen::MatrixXd::Zero(k, k);
  out.load = Eigen::VectorXd::Zero(k);

  Eigen::VectorXd vals(k), gx(k), gy(k);
  for (int qj = 0; qj < 4; ++qj)
    for (int qi = 0; qi < 4; ++qi) {
      const double x = c.xc() + 0.5 * c.hx * gr.nodes[qi];
      const double y = c.yc() + 0.5 * c.hy * gr.nodes[qj];
      const double w = gr.weights[qi] * gr.weights[qj] * 0.25 * c.hx * c.hy;
      const double r = rho(x, y);
      if (!(r > 0.0)) throw PreconditionError("rho must be positive at quadrature nodes");
      for (int b = 0; b < k; ++b) {
        vals[b] = basis[b].eval(x, y);
        const auto g = basis[b].grad(x, y);
        gx[b] = g.x();
        gy[b] = g.y();
      }
      out.stiffness.noalias() += w * (gx * gx.transpose() + gy * gy.transpose());
      out.mass.noalias() += (w * r) * (vals * vals.transpose());
      out.load.noalias() += (w * r * f(x, y)) * vals;
    }
  return out;
}

namespace {

Eigen::MatrixXd rm_dof_matrix(const CellGeom& c) {
  Eigen::MatrixXd A(8, 8);
  // corners in scaled coordinates, counterclockwise from lower-left
  const double vx[4] = {c.x0, c.x0 + c.hx, c.x0 + c.hx, c.x0};
  const double vy[4] = {c.y0, c.y0, c.y0 + c.hy, c.y0 + c.hy};
  const CellSide sides[4] = {CellSide::Bottom, CellSide::Right, CellSide::Top, CellSide::Left};
  for (int k = 0; k < 8; ++k) {
    LocalQuad mono(c);
    mono.coeff(k) = 1.0;
    for (int v = 0; v < 4; ++v) A(v, k) = mono.eval(vx[v], vy[v]);
    for (int s = 0; s < 4; ++s) A(4 + s, k) = edge_mean_coordinate_derivative(mono, sides[s]);
  }
  return A;
}

}  // namespace

std::array<LocalQuad, 8> rm_local_basis(const CellGeom& c) {
  if (!(c.hx > 0.0) || !(c.hy > 0.0)) throw PreconditionError("degenerate cell");
  const Eigen::MatrixXd A = rm_dof_matrix(c);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw NumericalError("RM degree-of-freedom matrix is singular");
  const Eigen::MatrixXd C = lu.inverse();
  std::array<LocalQuad, 8> basis;
  for (int b = 0; b < 8; ++b) {
    basis[b] = LocalQuad(c);
    for (int k = 0; k < 8; ++k) basis[b].coeff(k) = C(k, b);
  }
  return basis;
}

double rm_dof_condition(const CellGeom& c) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rm_dof_matrix(c));
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

}  // namespace rrm
