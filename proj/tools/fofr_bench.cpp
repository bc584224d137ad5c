// Benchmark: the OpenMP-parallel engines against their serial reference
// paths, verifying bitwise-identical results while timing both.

#include <chrono>
#include <cstdio>

#include "fofr/bootstrap.hpp"
#include "fofr/parallel.hpp"
#include "fofr/simgen.hpp"

using namespace fofr;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool same_matrix(const MatrixXd& a, const MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

}  // namespace

int main() {
  Scenario sc;
  sc.spectrum = {2.5, 20};
  sc.x_law = {LatentLaw::CenteredExp, WLaw::Normal};
  sc.e_law = sc.x_law;
  sc.slope = {SlopeKind::Prod, 1.5, 2.5, 1};
  sc.n = 100;
  sc.grid_m = 101;

  const StudyContext ctx = make_study_context(sc);
  RngStream rng{StreamKey(7)};
  const Dataset ds = gen_dataset(ctx, sc, rng);

  const int workers = hardware_threads();
  std::printf("workers available: %d\n\n", workers);

  // --- residual bootstrap ---------------------------------------------
  BootConfig cfg;
  cfg.k = 4;
  cfg.g = 4;
  cfg.h = 6;
  cfg.B = 4000;
  cfg.seed = 42;
  const BootstrapPlan plan =
      prepare_bootstrap(ds.X, ds.Y, ds.truth.x0, cfg, {ds.truth.x0}, {0.9});

  auto t0 = std::chrono::steady_clock::now();
  const BootstrapDraws serial = run_bootstrap_draws(plan, 1);
  const double boot_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const BootstrapDraws parallel = run_bootstrap_draws(plan, 0);
  const double boot_parallel = seconds_since(t0);

  const bool boot_same =
      same_matrix(serial.sq_norms, parallel.sq_norms) &&
      same_matrix(serial.projections, parallel.projections) &&
      same_matrix(serial.evaluations, parallel.evaluations);
  std::printf("bootstrap  B=%d      serial %.3fs   parallel %.3fs   x%.2f   %s\n",
              cfg.B, boot_serial, boot_parallel, boot_serial / boot_parallel,
              boot_same ? "identical" : "MISMATCH");

  // --- leave-one-out cross validation ----------------------------------
  t0 = std::chrono::steady_clock::now();
  const int k_serial = loocv_select(ds.X, ds.Y, 10, 1);
  const double cv_serial = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  const int k_parallel = loocv_select(ds.X, ds.Y, 10, 0);
  const double cv_parallel = seconds_since(t0);

  std::printf("loocv      n=%d      serial %.3fs   parallel %.3fs   x%.2f   %s\n",
              ds.X.n(), cv_serial, cv_parallel, cv_serial / cv_parallel,
              k_serial == k_parallel ? "identical" : "MISMATCH");

  return (boot_same && k_serial == k_parallel) ? 0 : 1;
}
