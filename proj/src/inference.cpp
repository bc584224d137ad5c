#include "fofr/inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "fofr/rng.hpp"

namespace fofr {

const char* method_name(Method m) { return m == Method::CLT ? "clt" : "rb"; }

bool ConfidenceBall::contains(const Fn& y) const {
  check_same_grid(center.grid, y.grid, "ConfidenceBall::contains");
  const VectorXd diff = center.values - y.values;
  const double dist =
      std::sqrt((diff.array().square() * center.grid->weights().array()).sum());
  return dist <= radius;
}

double weighted_chisq_quantile(const VectorXd& sigmas, double level,
                               int n_draws, std::uint64_t seed) {
  if (!(level > 0.0 && level < 1.0)) {
    fail(ErrorKind::InvalidArgument,
         "weighted_chisq_quantile: level must lie in (0,1)");
  }
  for (int l = 0; l < sigmas.size(); ++l) {
    if (!(sigmas[l] >= 0.0) || !std::isfinite(sigmas[l])) {
      fail(ErrorKind::InvalidArgument,
           "weighted_chisq_quantile: weights must be finite and >= 0");
    }
  }
  if (sigmas.size() == 0 || sigmas.maxCoeff() == 0.0) return 0.0;
  if (n_draws < 1000) {
    fail(ErrorKind::InvalidArgument,
         "weighted_chisq_quantile: needs at least 1000 draws");
  }

  RngStream rng{StreamKey(seed)};
  std::vector<double> draws(static_cast<std::size_t>(n_draws));
  for (auto& d : draws) {
    double acc = 0.0;
    for (int l = 0; l < sigmas.size(); ++l) acc += sigmas[l] * rng.chisq1();
    d = acc;
  }
  return bootstrap_quantile(std::move(draws), level);
}

VectorXd error_cov_eigenvalues(const KernelOp& sigma, int n_bound) {
  const int m = sigma.grid->size();
  const VectorXd sqrt_w = sigma.grid->weights().array().sqrt();
  const MatrixXd s =
      sqrt_w.asDiagonal() * sigma.kernel * sqrt_w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(s, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure,
         "error_cov_eigenvalues: eigensolver did not converge");
  }
  const VectorXd& vals = solver.eigenvalues();  // ascending
  const double top = std::max(vals[m - 1], 0.0);
  const double cutoff = 1e-12 * top;
  const int max_rank = std::min(n_bound, m);
  int rank = 0;
  for (int j = m - 1; j >= 0 && rank < max_rank; --j) {
    const double v = std::max(vals[j], 0.0);
    if (v <= 0.0 || v < cutoff) break;
    ++rank;
  }
  VectorXd out(rank);
  for (int j = 0; j < rank; ++j) out[j] = std::max(vals[m - 1 - j], 0.0);
  return out;
}

namespace {

// Shared CLT-side state: the h-fit at x0 and the k-truncation error
// covariance.
struct CltParts {
  Fn mu_h_x0;
  double t_hat = 0.0;
  int n = 0;
  KernelOp sigma_k;
};

CltParts clt_parts(const FnSet& X, const FnSet& Y, const Fn& x0, int h,
                   int k) {
  FpcaPtr fpca = fit_fpca_shared(X);
  const FofrModel model_h = fit_fofr_with(fpca, Y, h);
  const FofrModel model_k =
      (k == h) ? model_h : fit_fofr_with(fpca, Y, k);
  CltParts parts;
  parts.mu_h_x0 = predict_mean(model_h, x0);
  parts.t_hat = scaling_hat(*fpca, x0, h);
  parts.n = X.n();
  parts.sigma_k = error_cov(residuals_of(model_k, X, Y));
  return parts;
}

}  // namespace

ConfidenceBall clt_ball(const FnSet& X, const FnSet& Y, const Fn& x0, int h,
                        int k, double level, std::uint64_t seed,
                        int n_draws) {
  const CltParts parts = clt_parts(X, Y, x0, h, k);
  const VectorXd sigmas = error_cov_eigenvalues(parts.sigma_k, parts.n);
  const double c_hat = weighted_chisq_quantile(sigmas, level, n_draws, seed);
  return ConfidenceBall{parts.mu_h_x0,
                        std::sqrt(c_hat) * std::sqrt(parts.t_hat / parts.n),
                        level, Method::CLT};
}

ConfidenceBall rb_ball(const FnSet& X, const FnSet& Y, const Fn& x0,
                       const BootConfig& cfg, double level, int threads) {
  const BootstrapPlan plan = prepare_bootstrap(X, Y, x0, cfg, {}, {});
  const BootstrapDraws draws = run_bootstrap_draws(plan, threads);
  const double c_hat = bootstrap_quantile(
      {draws.sq_norms.data(), draws.sq_norms.data() + draws.sq_norms.size()},
      level);
  return ConfidenceBall{Fn{plan.grid, plan.mu_h_x0},
                        std::sqrt(c_hat) *
                            std::sqrt(plan.t_hat_x0 / plan.n),
                        level, Method::RB};
}

Interval proj_interval(const FnSet& X, const FnSet& Y, const Fn& x0,
                       const Fn& x, Method method, const BootConfig& cfg,
                       double level, int threads) {
  Interval iv;
  iv.level = level;
  iv.target = TargetKind::Projection;
  iv.method = method;
  if (method == Method::CLT) {
    const CltParts parts = clt_parts(X, Y, x0, cfg.h, cfg.k);
    iv.center = inner(parts.mu_h_x0, x);
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    iv.halfwidth = std::sqrt(kernel_quad_form(parts.sigma_k, x)) * z *
                   std::sqrt(parts.t_hat / parts.n);
  } else {
    const BootstrapPlan plan = prepare_bootstrap(X, Y, x0, cfg, {x}, {});
    const BootstrapDraws draws = run_bootstrap_draws(plan, threads);
    std::vector<double> abs_proj(static_cast<std::size_t>(cfg.B));
    for (int b = 0; b < cfg.B; ++b) {
      abs_proj[static_cast<std::size_t>(b)] = std::abs(draws.projections(b, 0));
    }
    const double c_hat = bootstrap_quantile(std::move(abs_proj), level);
    iv.center = plan.mu_h_x0.dot(x.values.cwiseProduct(x.grid->weights()));
    iv.halfwidth = c_hat / plan.sqrt_n_over_t;
  }
  iv.lower = iv.center - iv.halfwidth;
  iv.upper = iv.center + iv.halfwidth;
  return iv;
}

Interval eval_interval(const FnSet& X, const FnSet& Y, const Fn& x0, double t,
                       Method method, const BootConfig& cfg, double level,
                       int threads) {
  if (t < 0.0 || t > 1.0) {
    fail(ErrorKind::InvalidArgument,
         "eval_interval: evaluation point outside [0,1]");
  }
  Interval iv;
  iv.level = level;
  iv.target = TargetKind::Evaluation;
  iv.eval_t = t;
  iv.method = method;
  if (method == Method::CLT) {
    const CltParts parts = clt_parts(X, Y, x0, cfg.h, cfg.k);
    iv.center = eval_at(parts.mu_h_x0, t);
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double var = std::max(0.0, kernel_diag_at(parts.sigma_k, t));
    iv.halfwidth = std::sqrt(var) * z * std::sqrt(parts.t_hat / parts.n);
  } else {
    const BootstrapPlan plan = prepare_bootstrap(X, Y, x0, cfg, {}, {t});
    const BootstrapDraws draws = run_bootstrap_draws(plan, threads);
    std::vector<double> abs_eval(static_cast<std::size_t>(cfg.B));
    for (int b = 0; b < cfg.B; ++b) {
      abs_eval[static_cast<std::size_t>(b)] = std::abs(draws.evaluations(b, 0));
    }
    const double c_hat = bootstrap_quantile(std::move(abs_eval), level);
    iv.center = eval_at(Fn{plan.grid, plan.mu_h_x0}, t);
    iv.halfwidth = c_hat / plan.sqrt_n_over_t;
  }
  iv.lower = iv.center - iv.halfwidth;
  iv.upper = iv.center + iv.halfwidth;
  return iv;
}

TestResult mean_equality_test(const FnSet& X, const FnSet& Y, const Fn& x0,
                              const BootConfig& cfg, int threads) {
  const BootstrapPlan plan = prepare_bootstrap(X, Y, x0, cfg, {}, {});
  const BootstrapDraws draws = run_bootstrap_draws(plan, threads);

  const VectorXd diff = plan.mu_h_x0 - plan.ybar;
  const double stat =
      (diff.array().square() * plan.grid->weights().array()).sum() *
      plan.sqrt_n_over_t * plan.sqrt_n_over_t;

  int at_least = 0;
  for (int b = 0; b < cfg.B; ++b) {
    if (draws.sq_norms[b] >= stat) ++at_least;
  }
  return TestResult{stat, static_cast<double>(at_least) / cfg.B, cfg.B};
}

}  // namespace fofr
