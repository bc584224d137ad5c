#include "fofr/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fofr/parallel.hpp"
#include "fofr/rng.hpp"

namespace fofr {

BootstrapPlan prepare_bootstrap(const FnSet& X, const FnSet& Y, const Fn& x0,
                                const BootConfig& cfg,
                                const std::vector<Fn>& proj_fns,
                                const std::vector<double>& eval_ts) {
  return prepare_bootstrap(fit_fpca_shared(X), X, Y, x0, cfg, proj_fns,
                           eval_ts);
}

BootstrapPlan prepare_bootstrap(FpcaPtr fpca, const FnSet& X, const FnSet& Y,
                                const Fn& x0, const BootConfig& cfg,
                                const std::vector<Fn>& proj_fns,
                                const std::vector<double>& eval_ts) {
  check_same_grid(X.grid, Y.grid, "bootstrap");
  check_same_grid(X.grid, x0.grid, "bootstrap");
  if (cfg.B < 1) {
    fail(ErrorKind::InvalidArgument, "bootstrap: B must be >= 1");
  }
  if (cfg.k < 1 || cfg.g < 1 || cfg.h < 1) {
    fail(ErrorKind::InvalidArgument, "bootstrap: truncations must be >= 1");
  }
  const int n = X.n();
  if (n < 1 || Y.n() != n) {
    fail(ErrorKind::InvalidArgument, "bootstrap: empty or mismatched sample");
  }
  const int max_trunc = std::max({cfg.k, cfg.g, cfg.h});
  check_truncation(*fpca, max_trunc, "bootstrap");
  if (cfg.condition_r_violated()) {
    warn("bootstrap: h = " + std::to_string(cfg.h) + " < g = " +
         std::to_string(cfg.g) +
         " violates the truncation-ratio condition; the resampling "
         "distribution may be inconsistent");
  }

  BootstrapPlan plan;
  plan.grid = X.grid;
  plan.n = n;
  plan.config = cfg;

  // centered residuals at the initial truncation k
  const FofrModel model_k = fit_fofr_with(fpca, Y, cfg.k);
  plan.residuals = residuals_of(model_k, X, Y, /*center=*/true).residuals.rows;

  plan.score_over_n = fpca->scores.leftCols(cfg.h) / n;

  const VectorXd s0 = scores_of(*fpca, x0, max_trunc);
  plan.t_hat_x0 =
      (s0.head(cfg.h).array().square() / fpca->eigvals.head(cfg.h).array())
          .sum();
  if (!(plan.t_hat_x0 > 0.0)) {
    fail(ErrorKind::NumericalFailure,
         "bootstrap: scaling t_hat_h(x0) is numerically zero");
  }
  plan.sqrt_n_over_t = std::sqrt(n / plan.t_hat_x0);
  plan.s0_over_gamma =
      s0.head(cfg.h).array() / fpca->eigvals.head(cfg.h).array();

  // cross_j = n^-1 sum_i score_ij (Y_i - ybar); shared by every truncation
  MatrixXd y_centered = Y.rows.rowwise() - Y.rows.colwise().mean();
  const MatrixXd cross =
      (fpca->scores.leftCols(max_trunc).transpose() * y_centered) / n;

  plan.ybar = Y.rows.colwise().mean().transpose();
  plan.mu_h_x0 = plan.ybar;
  for (int j = 0; j < cfg.h; ++j) {
    plan.mu_h_x0 += (s0[j] / fpca->eigvals[j]) * cross.row(j).transpose();
  }

  plan.bias = VectorXd::Zero(X.grid->size());
  for (int j = cfg.h; j < cfg.g; ++j) {
    plan.bias -= (s0[j] / fpca->eigvals[j]) * cross.row(j).transpose();
  }

  plan.proj_w.resize(static_cast<int>(proj_fns.size()), X.grid->size());
  for (std::size_t p = 0; p < proj_fns.size(); ++p) {
    check_same_grid(X.grid, proj_fns[p].grid, "bootstrap");
    plan.proj_w.row(static_cast<int>(p)) =
        proj_fns[p].values.cwiseProduct(X.grid->weights()).transpose();
  }
  plan.eval_ts = eval_ts;
  return plan;
}

BootstrapDraws run_bootstrap_draws(const BootstrapPlan& plan, int threads) {
  const int n = plan.n;
  const int m = plan.grid->size();
  const int num_proj = static_cast<int>(plan.proj_w.rows());
  const int num_eval = static_cast<int>(plan.eval_ts.size());
  const int B = plan.config.B;

  BootstrapDraws draws;
  draws.config = plan.config;
  draws.scaling_used = plan.t_hat_x0;
  draws.sq_norms.resize(B);
  draws.projections.resize(B, num_proj);
  draws.evaluations.resize(B, num_eval);

  std::vector<std::pair<int, double>> eval_locs;
  eval_locs.reserve(plan.eval_ts.size());
  for (double t : plan.eval_ts) eval_locs.push_back(interp_locate(*plan.grid, t));

  const StreamKey root(plan.config.seed);
  const VectorXd& w = plan.grid->weights();

  parallel_for(
      B,
      [&](std::ptrdiff_t b) {
        RngStream rng(root.child(static_cast<std::uint64_t>(b)));

        MatrixXd gathered(n, m);
        for (int i = 0; i < n; ++i) {
          gathered.row(i) =
              plan.residuals.row(static_cast<int>(rng.below(n)));
        }

        // T* = sqrt(n/t_hat) * (bias + mean(eps*) + sum_j s0_j/gamma_j d_j)
        const VectorXd mean_part =
            gathered.colwise().sum().transpose() / n;
        const MatrixXd d = plan.score_over_n.transpose() * gathered;  // h x m
        VectorXd t_star = plan.bias + mean_part;
        t_star.noalias() += d.transpose() * plan.s0_over_gamma;
        t_star *= plan.sqrt_n_over_t;

        draws.sq_norms[b] = (t_star.array().square() * w.array()).sum();
        if (num_proj > 0) {
          draws.projections.row(b) = (plan.proj_w * t_star).transpose();
        }
        for (int q = 0; q < num_eval; ++q) {
          const auto [i, u] = eval_locs[q];
          draws.evaluations(b, q) =
              (1.0 - u) * t_star[i] + u * t_star[i + 1];
        }
      },
      threads);

  return draws;
}

BootstrapDraws run_residual_bootstrap(const FnSet& X, const FnSet& Y,
                                      const Fn& x0, const BootConfig& cfg,
                                      const std::vector<Fn>& proj_fns,
                                      const std::vector<double>& eval_ts,
                                      int threads) {
  return run_bootstrap_draws(
      prepare_bootstrap(X, Y, x0, cfg, proj_fns, eval_ts), threads);
}

double bootstrap_quantile(std::vector<double> draws, double level) {
  if (draws.empty()) {
    fail(ErrorKind::InvalidArgument, "bootstrap_quantile: empty draws");
  }
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorKind::InvalidArgument,
         "bootstrap_quantile: level must lie in (0,1)");
  }
  std::sort(draws.begin(), draws.end());
  const auto b = static_cast<double>(draws.size());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(level * (b + 1.0)));
  idx = std::clamp<std::ptrdiff_t>(idx, 1,
                                   static_cast<std::ptrdiff_t>(draws.size()));
  return draws[static_cast<std::size_t>(idx - 1)];
}

}  // namespace fofr
