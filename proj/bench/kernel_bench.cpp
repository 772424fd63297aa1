// Timing comparison of the serial and OpenMP kernel paths: assembly and
// error-norm integration on a large Wilson grid.

#include <chrono>
#include <cstdio>

#include <omp.h>

#include "rrmfem/postproc.hpp"
#include "rrmfem/problems.hpp"
#include "rrmfem/solve.hpp"

using namespace rrm;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename Fn>
double best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int m = argc > 1 ? std::atoi(argv[1]) : 384;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  const RectGrid g = build_uniform(m, m, Domain::unit_square());
  const ManufacturedProblem prob = example1();

  std::printf("grid %dx%d (%d cells), %d threads\n", m, m, g.active_cell_count(),
              omp_get_max_threads());

  AssembledSystem sys;
  const double ta_serial = best_of(reps, [&] {
    sys = assemble(SpaceKind::Wilson, g, prob.rho, prob.f, true, Exec::Serial);
  });
  const double ta_parallel = best_of(reps, [&] {
    sys = assemble(SpaceKind::Wilson, g, prob.rho, prob.f, true, Exec::Parallel);
  });
  std::printf("assemble (Wilson):    serial %8.3fs  omp %8.3fs  speedup %.2fx\n", ta_serial,
              ta_parallel, ta_serial / ta_parallel);

  const AssembledSystem check =
      assemble(SpaceKind::Wilson, g, prob.rho, prob.f, true, Exec::Serial);
  const double dev = (Eigen::MatrixXd(sys.K.block(0, 0, 50, 50)) -
                      Eigen::MatrixXd(check.K.block(0, 0, 50, 50)))
                         .cwiseAbs()
                         .maxCoeff();
  std::printf("serial/parallel agreement on a sample block: %.1e\n", dev);

  const DiscreteField field =
      expand_solution(g, sys.map, Eigen::VectorXd::Ones(sys.map.n_free));
  const double tn_serial = best_of(reps, [&] {
    (void)error_norms(field, prob.u, prob.grad_u, prob.rho, Exec::Serial);
  });
  const double tn_parallel = best_of(reps, [&] {
    (void)error_norms(field, prob.u, prob.grad_u, prob.rho, Exec::Parallel);
  });
  std::printf("error norms (16 pts): serial %8.3fs  omp %8.3fs  speedup %.2fx\n", tn_serial,
              tn_parallel, tn_serial / tn_parallel);
  return 0;
}
