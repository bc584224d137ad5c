#pragma once

#include <cstdint>
#include <vector>

#include "fofr/fofr_model.hpp"

namespace fofr {

/// Three-truncation residual bootstrap configuration: k for computing the
/// resampled residuals, g for generating bootstrap responses, h for the
/// bootstrap estimator. h < g flags the regime in which the resampling is
/// known to lose validity; the engine warns but runs.
struct BootConfig {
  int k = 1;
  int g = 1;
  int h = 1;
  int B = 1000;
  std::uint64_t seed = 0;

  bool condition_r_violated() const { return h < g; }
};

/// Empirical law of the bootstrap statistic: per resample the squared norm
/// ||T*||^2, projections <T*, x_p>, and evaluations T*(t_q).
struct BootstrapDraws {
  VectorXd sq_norms;     // B
  MatrixXd projections;  // B x P
  MatrixXd evaluations;  // B x Q
  BootConfig config;
  double scaling_used = 0.0;  // t_hat_h(x0)
};

/// Everything a resample reads; fixed per dataset. The per-draw statistic is
/// evaluated in the algebraically reduced form
///
///   T*_b = sqrt(n / t_hat) * (bias + L(eps*_b)),
///   L(e) = mean(e) + sum_{j<=h} s0_j gamma_j^-1 n^-1 sum_i score_ij e_i,
///
/// which equals mu*_h(x0) - mu_g(x0) exactly in exact arithmetic: the
/// g-model part of the resampled responses passes through the h-refit
/// unchanged (scores are empirically orthogonal), except that truncations
/// h < j <= g are lost, which is the `bias` curve below. Evaluating this
/// form keeps degenerate resampling exactly degenerate.
struct BootstrapPlan {
  GridPtr grid;
  int n = 0;
  BootConfig config;
  MatrixXd residuals;       // n x m, centered, truncation k
  MatrixXd score_over_n;    // n x h: scores(:, j) / n
  VectorXd s0_over_gamma;   // h: <x0 - xbar, phi_j> / gamma_j
  VectorXd bias;            // m: zero curve iff h >= g
  double t_hat_x0 = 0.0;
  double sqrt_n_over_t = 0.0;
  VectorXd mu_h_x0;         // m: mu_hat_h(x0), the inference center
  VectorXd ybar;            // m
  MatrixXd proj_w;          // P x m: quadrature-weighted projection curves
  std::vector<double> eval_ts;
};

BootstrapPlan prepare_bootstrap(const FnSet& X, const FnSet& Y, const Fn& x0,
                                const BootConfig& cfg,
                                const std::vector<Fn>& proj_fns,
                                const std::vector<double>& eval_ts);

/// Shares a precomputed FPCA of X across callers (cross-validation,
/// repeated truncation choices).
BootstrapPlan prepare_bootstrap(FpcaPtr fpca, const FnSet& X, const FnSet& Y,
                                const Fn& x0, const BootConfig& cfg,
                                const std::vector<Fn>& proj_fns,
                                const std::vector<double>& eval_ts);

/// Resample b draws its indices from stream(cfg.seed).child(b); results are
/// written by resample index, so any worker count produces identical draws.
BootstrapDraws run_bootstrap_draws(const BootstrapPlan& plan, int threads = 0);

BootstrapDraws run_residual_bootstrap(const FnSet& X, const FnSet& Y,
                                      const Fn& x0, const BootConfig& cfg,
                                      const std::vector<Fn>& proj_fns,
                                      const std::vector<double>& eval_ts,
                                      int threads = 0);

/// Right-continuous empirical quantile: the order statistic at index
/// ceil(level * (B + 1)) clipped to [1, B].
double bootstrap_quantile(std::vector<double> draws, double level);

}  // namespace fofr
