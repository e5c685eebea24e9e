// Benchmark: serial vs OpenMP upwind kernel, and a whole-solve timing.
// Checks bit-identical output of the two kernels while timing them.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "motorsim/meanfield_pde.hpp"
#include "motorsim/model.hpp"

using namespace motorsim;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int cells = argc > 1 ? std::atoi(argv[1]) : 200000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 400;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> n(cells + 1), out_s(cells + 1), out_p(cells + 1), b(cells + 1),
      a(cells + 2);
  for (double& x : n) x = U(rng);
  for (double& x : b) x = U(rng);
  for (double& x : a) x = 2.0 * U(rng) - 1.0;
  const double dt_over_dx = 0.3, bind_dt = 1e-3, decay_dt = 2e-3;

  std::printf("upwind kernel: %d cells, %d repetitions, %d threads\n", cells, reps,
              omp_get_max_threads());

  auto t0 = clock_type::now();
  for (int r = 0; r < reps; ++r)
    kernels::upwind_step_serial(n, out_s, a, dt_over_dx, b, bind_dt, decay_dt);
  const double t_serial = seconds_since(t0);

  t0 = clock_type::now();
  for (int r = 0; r < reps; ++r)
    kernels::upwind_step_parallel(n, out_p, a, dt_over_dx, b, bind_dt, decay_dt);
  const double t_parallel = seconds_since(t0);

  for (int j = 0; j <= cells; ++j)
    if (out_s[j] != out_p[j]) {
      std::printf("MISMATCH at cell %d: %.17g vs %.17g\n", j, out_s[j], out_p[j]);
      return 1;
    }

  std::printf("  serial:   %8.1f Mcell/s  (%.3f s)\n", cells * 1e-6 * reps / t_serial,
              t_serial);
  std::printf("  parallel: %8.1f Mcell/s  (%.3f s)  speedup %.2fx\n",
              cells * 1e-6 * reps / t_parallel, t_parallel, t_serial / t_parallel);
  std::printf("  outputs bit-identical\n");

  // Whole-solve timing on the default configuration.
  ModelParams p;
  p.binding = BindingDensity::gaussian(1.0, 0.5);
  PdeConfig cfg = default_grid(p, 4000, 5.0);
  cfg.series_dt = 0.1;
  t0 = clock_type::now();
  const PdeResult res = evolve(make_field(cfg.x_min, cfg.x_max, cfg.cells), p, cfg);
  std::printf("full solve (J=4000, t=5): %.3f s, final N=%.6f\n", seconds_since(t0),
              res.series.back().N);
  return 0;
}
