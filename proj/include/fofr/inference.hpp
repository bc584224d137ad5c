#pragma once

#include "fofr/bootstrap.hpp"

namespace fofr {

enum class Method { CLT, RB };

const char* method_name(Method m);

/// L2 ball around the estimated mean response.
struct ConfidenceBall {
  Fn center;
  double radius = 0.0;
  double level = 0.0;
  Method method = Method::CLT;

  bool contains(const Fn& y) const;
};

enum class TargetKind { Projection, Evaluation };

struct Interval {
  double center = 0.0;
  double halfwidth = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  TargetKind target = TargetKind::Projection;
  double eval_t = 0.0;  // meaningful for evaluation targets
  Method method = Method::CLT;

  bool contains(double v) const { return lower <= v && v <= upper; }
};

struct TestResult {
  double statistic = 0.0;  // n ||mu_h(x0) - ybar||^2 / t_hat_h(x0)
  double p_value = 0.0;
  int B = 0;
};

/// Empirical level-quantile of sum_l sigma_l V_l over n_draws simulations,
/// V_l iid chi-square(1); deterministic given the seed; 0 when every weight
/// is zero. n_draws >= 1000.
double weighted_chisq_quantile(const VectorXd& sigmas, double level,
                               int n_draws, std::uint64_t seed);

/// Eigenvalues of the error-covariance kernel (same symmetrized eigensolve
/// and numerical-rank cutoff as the FPCA route).
VectorXd error_cov_eigenvalues(const KernelOp& sigma, int n_bound);

/// CLT calibration: radius = sqrt(c_hat) sqrt(t_hat_h(x0)/n) with c_hat the
/// weighted chi-square quantile of the eigenvalues of the k-truncation error
/// covariance. The square root converts the squared-norm quantile to the
/// norm scale of the ball.
ConfidenceBall clt_ball(const FnSet& X, const FnSet& Y, const Fn& x0, int h,
                        int k, double level, std::uint64_t seed,
                        int n_draws = 10000);

/// Bootstrap calibration: radius = sqrt(quantile of ||T*||^2) sqrt(t_hat/n).
ConfidenceBall rb_ball(const FnSet& X, const FnSet& Y, const Fn& x0,
                       const BootConfig& cfg, double level, int threads = 0);

/// Projection interval <mu_h(x0), x> +/- c sqrt(t_hat/n); the CLT half-width
/// uses sqrt(<Sigma_k x, x>) z_{1-a/2}, the bootstrap one the level-quantile
/// of |<T*, x>|.
Interval proj_interval(const FnSet& X, const FnSet& Y, const Fn& x0,
                       const Fn& x, Method method, const BootConfig& cfg,
                       double level, int threads = 0);

/// Evaluation interval mu_h(x0)(t) +/- c sqrt(t_hat/n); the CLT half-width
/// uses sqrt(Sigma_k(t,t)) z_{1-a/2}, the bootstrap one the level-quantile
/// of |T*(t)|.
Interval eval_interval(const FnSet& X, const FnSet& Y, const Fn& x0, double t,
                       Method method, const BootConfig& cfg, double level,
                       int threads = 0);

/// Bootstrap test of H0: mu(x0) = E[Y]. p = #{b : ||T*_b||^2 >= statistic}/B;
/// ties count toward the null, so fully degenerate draws give p = 1.
TestResult mean_equality_test(const FnSet& X, const FnSet& Y, const Fn& x0,
                              const BootConfig& cfg, int threads = 0);

}  // namespace fofr
