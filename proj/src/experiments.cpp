#include "fofr/experiments.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "fofr/parallel.hpp"

namespace fofr {

const char* target_name(Target t) {
  switch (t) {
    case Target::MeanResponse: return "mr";
    case Target::Projection: return "proj";
    case Target::Evaluation: return "eval";
  }
  return "?";
}

const CoverageCell& CoverageReport::cell(Method m, Target t, int n,
                                         int delta) const {
  for (const auto& c : cells) {
    if (c.method == m && c.target == t && c.n == n && c.delta == delta) {
      return c;
    }
  }
  fail(ErrorKind::InvalidArgument, "CoverageReport: no such cell");
}

namespace {

Fn default_projection_curve(const GridPtr& grid) {
  VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) {
    const double t = grid->points()[i];
    v[i] = 10.0 * std::pow(t, 3) - 15.0 * std::pow(t, 4) + 6.0 * std::pow(t, 5);
  }
  return Fn{grid, std::move(v)};
}

struct RepOutcome {
  bool failed = true;
  // covered[delta][method][target]
  std::vector<std::array<std::array<bool, 3>, 2>> covered;
};

constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kBootStream = 1;
constexpr std::uint64_t kCltStream = 2;

}  // namespace

CoverageReport coverage_study(const Scenario& base,
                              const std::vector<int>& n_list,
                              const std::vector<int>& delta_list, int M, int B,
                              std::uint64_t seed, const CoverageOptions& opt) {
  if (M < 1 || B < 1) {
    fail(ErrorKind::InvalidArgument, "coverage_study: M and B must be >= 1");
  }
  for (int d : delta_list) {
    if (d < 0) {
      fail(ErrorKind::InvalidArgument, "coverage_study: delta must be >= 0");
    }
  }

  const StudyContext ctx = make_study_context(base);
  const Fn proj_x = opt.proj_values
                        ? Fn{ctx.grid, *opt.proj_values}
                        : default_projection_curve(ctx.grid);
  const double z = normal_quantile(1.0 - (1.0 - opt.level) / 2.0);
  const StreamKey root(seed);
  const int num_delta = static_cast<int>(delta_list.size());

  CoverageReport report;
  report.M = M;
  report.B = B;
  report.k_max = opt.k_max;
  report.level = opt.level;
  report.seed = seed;

  for (int n : n_list) {
    Scenario scenario = base;
    scenario.n = n;

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(M));

    parallel_for(
        M,
        [&](std::ptrdiff_t r) {
          RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
          out.covered.assign(static_cast<std::size_t>(num_delta), {});
          try {
            RngStream data_rng(
                root.child(kDataStream).child(static_cast<std::uint64_t>(r)));
            const Dataset ds = gen_dataset(ctx, scenario, data_rng);
            const Fn& x0 = ds.truth.x0;

            const double proj_true = inner(ds.truth.mu_x0, proj_x);
            const double eval_true = eval_at(ds.truth.mu_x0, opt.eval_t);

            FpcaPtr fpca = fit_fpca_shared(ds.X);
            const int k_cap = std::min(opt.k_max, fpca->rank() - 1);
            if (k_cap < 1) {
              fail(ErrorKind::NumericalFailure, "rank collapse");
            }
            const int k = loocv_select(ds.X, ds.Y, k_cap, /*threads=*/1);
            const int g = k;

            // CLT calibration pieces shared by every delta
            const FofrModel model_k = fit_fofr_with(fpca, ds.Y, k);
            const KernelOp sigma_k =
                error_cov(residuals_of(model_k, ds.X, ds.Y));
            const VectorXd sigmas = error_cov_eigenvalues(sigma_k, n);
            const double c_clt = weighted_chisq_quantile(
                sigmas, opt.level, opt.clt_draws,
                root.child(kCltStream)
                    .child(static_cast<std::uint64_t>(r))
                    .state);
            const double proj_sd = std::sqrt(kernel_quad_form(sigma_k, proj_x));
            const double eval_sd = std::sqrt(
                std::max(0.0, kernel_diag_at(sigma_k, opt.eval_t)));

            for (int di = 0; di < num_delta; ++di) {
              const int h = k + delta_list[di];
              BootConfig cfg;
              cfg.k = k;
              cfg.g = g;
              cfg.h = h;
              cfg.B = B;
              cfg.seed = root.child(kBootStream)
                             .child(static_cast<std::uint64_t>(r))
                             .child(static_cast<std::uint64_t>(di))
                             .state;
              const BootstrapPlan plan = prepare_bootstrap(
                  fpca, ds.X, ds.Y, x0, cfg, {proj_x}, {opt.eval_t});
              const BootstrapDraws draws =
                  run_bootstrap_draws(plan, /*threads=*/1);

              const Fn center{plan.grid, plan.mu_h_x0};
              const VectorXd diff = plan.mu_h_x0 - ds.truth.mu_x0.values;
              const double dist = std::sqrt(
                  (diff.array().square() * plan.grid->weights().array())
                      .sum());
              const double proj_center =
                  plan.proj_w.row(0).dot(plan.mu_h_x0);
              const double eval_center = eval_at(center, opt.eval_t);
              const double root_t_over_n = 1.0 / plan.sqrt_n_over_t;

              // RB
              {
                std::vector<double> sq(
                    draws.sq_norms.data(),
                    draws.sq_norms.data() + draws.sq_norms.size());
                const double radius =
                    std::sqrt(bootstrap_quantile(std::move(sq), opt.level)) *
                    root_t_over_n;
                std::vector<double> ap(static_cast<std::size_t>(B)),
                    ae(static_cast<std::size_t>(B));
                for (int b = 0; b < B; ++b) {
                  ap[static_cast<std::size_t>(b)] =
                      std::abs(draws.projections(b, 0));
                  ae[static_cast<std::size_t>(b)] =
                      std::abs(draws.evaluations(b, 0));
                }
                const double proj_half =
                    bootstrap_quantile(std::move(ap), opt.level) *
                    root_t_over_n;
                const double eval_half =
                    bootstrap_quantile(std::move(ae), opt.level) *
                    root_t_over_n;
                auto& rb = out.covered[static_cast<std::size_t>(di)][1];
                rb[0] = dist <= radius;
                rb[1] = std::abs(proj_center - proj_true) <= proj_half;
                rb[2] = std::abs(eval_center - eval_true) <= eval_half;
              }
              // CLT
              {
                const double radius = std::sqrt(c_clt) * root_t_over_n;
                const double proj_half = proj_sd * z * root_t_over_n;
                const double eval_half = eval_sd * z * root_t_over_n;
                auto& clt = out.covered[static_cast<std::size_t>(di)][0];
                clt[0] = dist <= radius;
                clt[1] = std::abs(proj_center - proj_true) <= proj_half;
                clt[2] = std::abs(eval_center - eval_true) <= eval_half;
              }
            }
            out.failed = false;
          } catch (const Error&) {
            out.failed = true;
          }
        },
        opt.threads);

    int failures = 0;
    for (const auto& out : outcomes) {
      if (out.failed) ++failures;
    }
    const int successes = M - failures;
    report.failures.emplace_back(n, failures);

    for (int di = 0; di < num_delta; ++di) {
      for (int mi = 0; mi < 2; ++mi) {
        for (int ti = 0; ti < 3; ++ti) {
          int hits = 0;
          for (const auto& out : outcomes) {
            if (!out.failed &&
                out.covered[static_cast<std::size_t>(di)][mi][ti]) {
              ++hits;
            }
          }
          CoverageCell cell;
          cell.method = mi == 0 ? Method::CLT : Method::RB;
          cell.target = static_cast<Target>(ti);
          cell.n = n;
          cell.delta = delta_list[di];
          cell.successes = successes;
          cell.coverage =
              successes > 0 ? static_cast<double>(hits) / successes : 0.0;
          cell.se = successes > 0
                        ? std::sqrt(cell.coverage * (1.0 - cell.coverage) /
                                    successes)
                        : 0.0;
          report.cells.push_back(cell);
        }
      }
    }
  }
  return report;
}

void write_coverage_csv(std::ostream& os, const CoverageReport& report) {
  char buf[256];
  os << "# fofr coverage\n";
  os << "# rng=" << kRngName << " seed=" << report.seed << "\n";
  std::snprintf(buf, sizeof(buf), "# M=%d B=%d k_max=%d level=%.17g\n",
                report.M, report.B, report.k_max, report.level);
  os << buf;
  os << "# failed_replications:";
  for (const auto& [n, f] : report.failures) {
    os << " n=" << n << ":" << f;
  }
  os << "\n";
  os << "method,target,n,delta,coverage,se,successes\n";
  for (const auto& c : report.cells) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.17g,%.17g,%d\n",
                  method_name(c.method), target_name(c.target), c.n, c.delta,
                  c.coverage, c.se, c.successes);
    os << buf;
  }
}

double sample_kurtosis(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  return m4 / (m2 * m2);
}

double jarque_bera_pvalue(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return std::exp(-jb / 2.0);  // chi-square(2) upper tail
}

ScalingReport scaling_comparison(const Scenario& base, int n, int h, int M,
                                 std::uint64_t seed, int threads) {
  if (M < 2) {
    fail(ErrorKind::InvalidArgument, "scaling_comparison: M must be >= 2");
  }
  const StudyContext ctx = make_study_context(base);
  const Fn proj_x = default_projection_curve(ctx.grid);
  const StreamKey root(seed);

  Scenario scenario = base;
  scenario.n = n;

  std::vector<double> u_h(static_cast<std::size_t>(M)),
      u_t(static_cast<std::size_t>(M));
  std::vector<char> ok(static_cast<std::size_t>(M), 0);

  parallel_for(
      M,
      [&](std::ptrdiff_t r) {
        try {
          RngStream rng(
              root.child(kDataStream).child(static_cast<std::uint64_t>(r)));
          const Dataset ds = gen_dataset(ctx, scenario, rng);
          FpcaPtr fpca = fit_fpca_shared(ds.X);
          const FofrModel model = fit_fofr_with(fpca, ds.Y, h);
          // slope-channel estimation error: the estimated centered mean
          // response against the true slope applied to the centered x0
          Fn est = predict_mean(model, ds.truth.x0);
          est.values -= model.ybar.values;
          const Fn centered_x0{ctx.grid, ds.truth.x0.values -
                                             fpca->mean_fn.values};
          est.values -= apply_op(ctx.slope, centered_x0).values;
          const double p = inner(est, proj_x);
          const double t_hat = scaling_hat(*fpca, ds.truth.x0, h);
          u_h[static_cast<std::size_t>(r)] = std::sqrt(n / double(h)) * p;
          u_t[static_cast<std::size_t>(r)] = std::sqrt(n / t_hat) * p;
          ok[static_cast<std::size_t>(r)] = 1;
        } catch (const Error&) {
          ok[static_cast<std::size_t>(r)] = 0;
        }
      },
      threads);

  std::vector<double> vh, vt;
  vh.reserve(u_h.size());
  vt.reserve(u_t.size());
  for (std::size_t r = 0; r < ok.size(); ++r) {
    if (ok[r]) {
      vh.push_back(u_h[r]);
      vt.push_back(u_t[r]);
    }
  }
  if (vh.size() < 8) {
    fail(ErrorKind::NumericalFailure,
         "scaling_comparison: too many failed replications");
  }

  ScalingReport rep;
  rep.n = n;
  rep.h = h;
  rep.M = M;
  rep.failures = M - static_cast<int>(vh.size());
  rep.kurtosis_h = sample_kurtosis(vh);
  rep.kurtosis_t = sample_kurtosis(vt);
  rep.jb_p_h = jarque_bera_pvalue(vh);
  rep.jb_p_t = jarque_bera_pvalue(vt);
  return rep;
}

}  // namespace fofr
