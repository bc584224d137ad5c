#include "fofr/simgen.hpp"

#include <cmath>

namespace fofr {

VectorXd eigenvalues_from_gaps(const SpectrumSpec& spec) {
  if (!(spec.a > 1.0)) {
    fail(ErrorKind::InvalidArgument,
         "eigenvalues_from_gaps: decay exponent must exceed 1");
  }
  if (spec.J0 < 1) {
    fail(ErrorKind::InvalidArgument, "eigenvalues_from_gaps: J0 must be >= 1");
  }
  constexpr long kPartial = 1000000;
  const double tail =
      std::pow(kPartial + 0.5, 1.0 - spec.a) / (spec.a - 1.0);
  VectorXd gammas(spec.J0);
  double acc = tail;
  for (long l = kPartial; l >= 1; --l) {
    acc += std::pow(static_cast<double>(l), -spec.a);
    if (l <= spec.J0) gammas[l - 1] = 2.0 * acc;
  }
  return gammas;
}

namespace {

double draw_latent(LatentLaw law, RngStream& rng) {
  switch (law) {
    case LatentLaw::Normal:
      return rng.normal();
    case LatentLaw::CenteredExp:
      return rng.exponential() - 1.0;
    case LatentLaw::None:
      return 1.0;
  }
  return 1.0;
}

double draw_w(WLaw law, RngStream& rng) {
  return law == WLaw::Normal ? rng.normal() : rng.rademacher();
}

}  // namespace

FnSet gen_fnset(int n, const VectorXd& eigvals, const OrthoSystem& basis,
                const ScoreLaw& law, RngStream& rng) {
  const int J = static_cast<int>(eigvals.size());
  if (basis.count() < J) {
    fail(ErrorKind::InvalidArgument,
         "gen_fnset: basis has fewer functions than the spectrum");
  }
  if (n < 1) {
    fail(ErrorKind::InvalidArgument, "gen_fnset: n must be >= 1");
  }
  const VectorXd sqrt_gamma = eigvals.array().sqrt();
  MatrixXd coef(n, J);
  for (int i = 0; i < n; ++i) {
    const double latent = draw_latent(law.latent, rng);
    for (int j = 0; j < J; ++j) {
      coef(i, j) = sqrt_gamma[j] * latent * draw_w(law.w, rng);
    }
  }
  return FnSet{basis.grid, coef * basis.funcs.topRows(J)};
}

KernelOp make_slope(const SlopeSpec& spec, const OrthoSystem& trig) {
  const int J = trig.count();
  if (spec.kind != SlopeKind::Exp && J < 1) {
    fail(ErrorKind::InvalidArgument, "make_slope: empty basis");
  }
  RngStream rng{StreamKey(spec.sign_seed)};
  VectorXd sign1(J), sign2(J), sign_diag(J);
  for (int j = 0; j < J; ++j) sign1[j] = rng.rademacher();
  for (int j = 0; j < J; ++j) sign2[j] = rng.rademacher();
  for (int j = 0; j < J; ++j) sign_diag[j] = rng.rademacher();

  const GridPtr grid = trig.grid;
  const int m = grid->size();
  switch (spec.kind) {
    case SlopeKind::Prod: {
      VectorXd u = VectorXd::Zero(m), v = VectorXd::Zero(m);
      for (int j = 0; j < J; ++j) {
        const double beta1 = 3.0 * sign1[j] * std::pow(j + 1.0, -spec.b1);
        const double beta2 = sign2[j] * std::pow(j + 1.0, -spec.b2);
        u += beta1 * trig.funcs.row(j).transpose();
        v += beta2 * trig.funcs.row(j).transpose();
      }
      return tensor_product(Fn{grid, u}, Fn{grid, v});
    }
    case SlopeKind::Diag: {
      MatrixXd kernel = MatrixXd::Zero(m, m);
      const double exponent = (spec.b1 + spec.b2) / 2.0;
      for (int j = 0; j < J; ++j) {
        const double c = 2.0 * sign_diag[j] * std::pow(j + 1.0, -exponent);
        kernel.noalias() += c * trig.funcs.row(j).transpose() * trig.funcs.row(j);
      }
      return KernelOp{grid, std::move(kernel)};
    }
    case SlopeKind::Exp: {
      MatrixXd kernel(m, m);
      for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
          kernel(r, c) =
              std::exp(-(grid->points()[r] + grid->points()[c]));
        }
      }
      return KernelOp{grid, std::move(kernel)};
    }
  }
  fail(ErrorKind::InvalidArgument, "make_slope: unknown kind");
}

StudyContext make_study_context(const Scenario& scenario) {
  StudyContext ctx;
  ctx.grid = Grid::uniform(scenario.grid_m);
  ctx.basis_x = basis_monomial(scenario.spectrum.J0, ctx.grid);
  ctx.basis_eps = basis_chebyshev_shifted(scenario.spectrum.J0, ctx.grid);
  ctx.trig = basis_trig(scenario.spectrum.J0, ctx.grid);
  ctx.eigvals = eigenvalues_from_gaps(scenario.spectrum);
  ctx.slope = make_slope(scenario.slope, ctx.trig);
  ctx.intercept = Fn{ctx.grid, VectorXd::Zero(ctx.grid->size())};
  return ctx;
}

Dataset gen_dataset(const StudyContext& ctx, const Scenario& scenario,
                    RngStream& rng) {
  const FnSet X = gen_fnset(scenario.n, ctx.eigvals, ctx.basis_x,
                            scenario.x_law, rng);
  const FnSet eps = gen_fnset(scenario.n, ctx.eigvals, ctx.basis_eps,
                              scenario.e_law, rng);

  Fn x0;
  if (scenario.fixed_x0) {
    if (scenario.fixed_x0->size() != ctx.grid->size()) {
      fail(ErrorKind::InvalidArgument,
           "gen_dataset: fixed x0 does not match the grid");
    }
    x0 = Fn{ctx.grid, *scenario.fixed_x0};
  } else {
    x0 = gen_fnset(1, ctx.eigvals, ctx.basis_x, scenario.x_law, rng).row(0);
  }

  // Y_i = B X_i + intercept + scale * eps_i
  const MatrixXd applied = X.rows * ctx.grid->weights().asDiagonal() *
                           ctx.slope.kernel.transpose();
  MatrixXd y = applied + scenario.error_scale * eps.rows;
  y.rowwise() += ctx.intercept.values.transpose();

  SimTruth truth;
  truth.slope = ctx.slope;
  truth.intercept = ctx.intercept;
  truth.x0 = x0;
  Fn mu = apply_op(ctx.slope, x0);
  mu.values += ctx.intercept.values;
  truth.mu_x0 = std::move(mu);
  truth.pop_eigvals = ctx.eigvals;

  return Dataset{X, FnSet{ctx.grid, std::move(y)}, std::move(truth)};
}

Dataset gen_dataset(const Scenario& scenario, RngStream& rng) {
  return gen_dataset(make_study_context(scenario), scenario, rng);
}

}  // namespace fofr
