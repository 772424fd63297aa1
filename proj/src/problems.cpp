#include "rrmfem/problems.hpp"

#include <algorithm>
#include <cmath>

namespace rrm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ManufacturedProblem example1() {
  ManufacturedProblem p;
  p.u = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  p.f = [](double x, double y) {
    return 2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y);
  };
  p.rho = [](double, double) { return 1.0; };
  p.grad_u = [](double x, double y) {
    return Eigen::Vector2d(kPi * std::cos(kPi * x) * std::sin(kPi * y),
                           kPi * std::sin(kPi * x) * std::cos(kPi * y));
  };
  return p;
}

ScalarField constant_field(double value) {
  return [value](double, double) { return value; };
}

std::vector<double> unit_square_eigenvalues(int k) {
  std::vector<double> all;
  const int kmax = 2 + (int)std::ceil(std::sqrt((double)k)) * 2;
  for (int a = 1; a <= kmax; ++a)
    for (int b = 1; b <= kmax; ++b) all.push_back((a * a + b * b) * kPi * kPi);
  std::sort(all.begin(), all.end());
  all.resize(k);
  return all;
}

double lshape_lambda3() { return 2.0 * kPi * kPi; }

}  // namespace rrm
