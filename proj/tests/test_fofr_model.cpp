#include <doctest.h>

#include <cmath>

#include "fofr/fofr_model.hpp"
#include "fofr/simgen.hpp"
#include "test_helpers.hpp"

using namespace fofr;
using test::curve;
using test::random_curve;

namespace {

// Noiseless finite-rank dataset: X spanned by J components, Y_i = B X_i.
struct RankJData {
  FnSet X, Y;
  KernelOp slope;
};

RankJData make_rank_j(int n, int J, std::uint64_t seed, int m = 51) {
  const GridPtr grid = Grid::uniform(m);
  const OrthoSystem trig = basis_trig(2 * J, grid);
  RngStream rng{StreamKey(seed)};

  MatrixXd coef(n, J);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < J; ++j) {
      coef(i, j) = (1.0 + 0.5 * j) * rng.normal();
    }
  }
  FnSet x{grid, coef * trig.funcs.topRows(J)};

  // B maps phi_j to a distinct combination of the second J trig functions
  MatrixXd kernel = MatrixXd::Zero(m, m);
  for (int j = 0; j < J; ++j) {
    const VectorXd target = trig.funcs.row(J + j).transpose() * (1.0 - 0.1 * j);
    kernel += target * trig.funcs.row(j);
  }
  KernelOp slope{grid, kernel};
  MatrixXd y = x.rows * grid->weights().asDiagonal() * slope.kernel.transpose();
  return RankJData{x, FnSet{grid, std::move(y)}, slope};
}

}  // namespace

TEST_CASE("fit_fofr: constant responses give zero slope") {
  const GridPtr grid = Grid::uniform(41);
  RngStream rng{StreamKey(1)};
  const int n = 12;
  MatrixXd xr(n, grid->size());
  for (int i = 0; i < n; ++i) {
    xr.row(i) = random_curve(grid, rng).values.transpose();
  }
  const Fn a = curve(grid, [](double t) { return 1.0 + t * t; });
  MatrixXd yr(n, grid->size());
  for (int i = 0; i < n; ++i) yr.row(i) = a.values.transpose();

  const FofrModel model = fit_fofr(FnSet{grid, xr}, FnSet{grid, yr}, 3);
  CHECK(model.slope_coefs.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(test::max_abs_diff(model.intercept.values, a.values) < 1e-10);

  // zero slope: every prediction equals the intercept
  const Fn probe = random_curve(grid, rng);
  CHECK(test::max_abs_diff(predict_mean(model, probe).values, a.values) <
        1e-9);
}

TEST_CASE("fit_fofr: noiseless finite-rank recovery at h = J") {
  const int J = 3;
  const RankJData data = make_rank_j(25, J, 42);
  const FofrModel model = fit_fofr(data.X, data.Y, J);
  for (int i = 0; i < data.X.n(); ++i) {
    Fn fitted = predict_mean(model, data.X.row(i));
    fitted.values -= data.Y.rows.row(i).transpose();
    const double rel = std::sqrt(
        (fitted.values.array().square() * data.X.grid->weights().array())
            .sum());
    CHECK(rel < 1e-8);
  }

  // residuals vanish, centered or not
  const ResidualSet res = residuals_of(model, data.X, data.Y);
  CHECK(res.residuals.rows.cwiseAbs().maxCoeff() < 1e-8);

  // normal equation at full retained rank: cross-cov = slope applied to cov
  const KernelOp delta_hat = [&] {
    const int n = data.X.n();
    MatrixXd xc = data.X.rows.rowwise() - data.X.rows.colwise().mean();
    MatrixXd yc = data.Y.rows.rowwise() - data.Y.rows.colwise().mean();
    return KernelOp{data.X.grid, (yc.transpose() * xc) / n};
  }();
  // B_h Gamma_hat as a kernel: rows are curves in t, columns in s
  const KernelOp b_kernel = slope_kernel(model);
  const KernelOp gamma_hat = covariance_kernel(data.X);
  const MatrixXd composed = b_kernel.kernel *
                            data.X.grid->weights().asDiagonal() *
                            gamma_hat.kernel;
  CHECK(hs_norm(KernelOp{data.X.grid, composed - delta_hat.kernel}) < 1e-8);
}

TEST_CASE("fit_fofr: n=2 line through the two observations") {
  const GridPtr grid = Grid::uniform(31);
  RngStream rng{StreamKey(9)};
  MatrixXd xr(2, grid->size()), yr(2, grid->size());
  for (int i = 0; i < 2; ++i) {
    xr.row(i) = random_curve(grid, rng).values.transpose();
    yr.row(i) = random_curve(grid, rng).values.transpose();
  }
  const FnSet x{grid, xr}, y{grid, yr};
  const FofrModel model = fit_fofr(x, y, 1);
  for (int i = 0; i < 2; ++i) {
    Fn fitted = predict_mean(model, x.row(i));
    CHECK(test::max_abs_diff(fitted.values, yr.row(i).transpose()) < 1e-8);
  }
}

TEST_CASE("predict_mean: mean regressor maps to the mean response") {
  const GridPtr grid = Grid::uniform(41);
  RngStream rng{StreamKey(12)};
  const int n = 15;
  MatrixXd xr(n, grid->size()), yr(n, grid->size());
  for (int i = 0; i < n; ++i) {
    xr.row(i) = random_curve(grid, rng).values.transpose();
    yr.row(i) = random_curve(grid, rng).values.transpose();
  }
  const FnSet x{grid, xr}, y{grid, yr};
  for (int h : {1, 3, 6}) {
    const FofrModel model = fit_fofr(x, y, h);
    const Fn at_mean = predict_mean(model, x.mean());
    CHECK(test::max_abs_diff(at_mean.values, model.ybar.values) < 1e-10);
  }
}

TEST_CASE("fofr invariants: affine equivariance and monotone fit") {
  const GridPtr grid = Grid::uniform(41);
  RngStream rng{StreamKey(31)};
  const int n = 18;
  MatrixXd xr(n, grid->size()), yr(n, grid->size());
  for (int i = 0; i < n; ++i) {
    xr.row(i) = random_curve(grid, rng).values.transpose();
    yr.row(i) = random_curve(grid, rng).values.transpose();
  }
  const FnSet x{grid, xr};
  const FnSet y{grid, yr};
  const Fn shift = curve(grid, [](double t) { return 2.0 - t; });
  MatrixXd yshift = yr;
  yshift.rowwise() += shift.values.transpose();
  const FnSet y2{grid, yshift};

  const FofrModel m1 = fit_fofr(x, y, 4);
  const FofrModel m2 = fit_fofr(x, y2, 4);
  CHECK((m1.slope_coefs - m2.slope_coefs).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(test::max_abs_diff(m2.intercept.values,
                           m1.intercept.values + shift.values) < 1e-10);

  // in-sample error is non-increasing in h
  const FpcaPtr fpca = fit_fpca_shared(x);
  double prev = std::numeric_limits<double>::infinity();
  for (int h = 1; h <= std::min(8, fpca->rank()); ++h) {
    const double mse = in_sample_mse(fit_fofr_with(fpca, y, h), x, y);
    CHECK(mse <= prev + 1e-12);
    prev = mse;
  }
}

TEST_CASE("residuals_of: centering and rank-1 leakage oracle") {
  const GridPtr grid = Grid::uniform(41);
  RngStream rng{StreamKey(77)};
  const int n = 14;
  MatrixXd xr(n, grid->size()), er(n, grid->size());
  for (int i = 0; i < n; ++i) {
    xr.row(i) = random_curve(grid, rng).values.transpose();
    er.row(i) = random_curve(grid, rng).values.transpose();
  }
  const Fn a = curve(grid, [](double t) { return std::sin(t); });
  MatrixXd yr = er;
  yr.rowwise() += a.values.transpose();  // zero-slope truth with noise
  const FnSet x{grid, xr}, y{grid, yr};

  const FofrModel model = fit_fofr(x, y, 1);
  const ResidualSet centered = residuals_of(model, x, y, true);
  CHECK(centered.residuals.rows.colwise().mean().cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(centered.centered);
  CHECK(centered.k == 1);

  // direct recomputation: residual = Y_i - mu(X_i), then centered
  const ResidualSet raw = residuals_of(model, x, y, false);
  for (int i = 0; i < n; ++i) {
    Fn fitted = predict_mean(model, x.row(i));
    const VectorXd expect = yr.row(i).transpose() - fitted.values;
    CHECK(test::max_abs_diff(raw.residuals.rows.row(i).transpose(), expect) <
          1e-12);
  }
  const MatrixXd recentered =
      raw.residuals.rows.rowwise() - raw.residuals.rows.colwise().mean();
  CHECK((recentered - centered.residuals.rows).cwiseAbs().maxCoeff() < 1e-12);

  // the uncentered residual mean is already ~0: the intercept absorbs it
  CHECK(raw.residuals.rows.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("error_cov: degenerate cases and Monte Carlo consistency") {
  const GridPtr grid = Grid::uniform(31);

  // all-zero residuals
  const ResidualSet zero{FnSet{grid, MatrixXd::Zero(4, grid->size())}, true, 1};
  CHECK(hs_norm(error_cov(zero)) == 0.0);

  // one nonzero residual e gives e (x) e / n
  RngStream rng{StreamKey(3)};
  const Fn e = random_curve(grid, rng);
  MatrixXd rows = MatrixXd::Zero(5, grid->size());
  rows.row(2) = e.values.transpose();
  const KernelOp cov = error_cov(ResidualSet{FnSet{grid, rows}, false, 1});
  const KernelOp expect{grid, (e.values * e.values.transpose()) / 5.0};
  CHECK((cov.kernel - expect.kernel).cwiseAbs().maxCoeff() < 1e-14);

  // Monte Carlo: estimated error covariance approaches the population one
  Scenario sc;
  sc.spectrum = {2.5, 20};
  sc.x_law = {LatentLaw::CenteredExp, WLaw::Normal};
  sc.e_law = sc.x_law;
  sc.n = 1000;
  sc.grid_m = 51;
  const StudyContext ctx = make_study_context(sc);
  RngStream gen{StreamKey(314)};
  const FnSet eps = gen_fnset(sc.n, ctx.eigvals, ctx.basis_eps, sc.e_law, gen);
  // population kernel: sum_j gamma_j phi_j(t) phi_j(s)
  MatrixXd pop = MatrixXd::Zero(sc.grid_m, sc.grid_m);
  for (int j = 0; j < ctx.eigvals.size(); ++j) {
    pop += ctx.eigvals[j] * ctx.basis_eps.funcs.row(j).transpose() *
           ctx.basis_eps.funcs.row(j);
  }
  const KernelOp sample_cov =
      error_cov(ResidualSet{eps, false, 1});  // mean ~ 0 by construction
  const double rel = hs_norm(KernelOp{ctx.grid, sample_cov.kernel - pop}) /
                     hs_norm(KernelOp{ctx.grid, pop});
  CHECK(rel <= 0.15);
}

TEST_CASE("loocv_select: exact recovery and degenerate bounds") {
  const int J = 3;
  const RankJData data = make_rank_j(20, J, 7);
  CHECK(loocv_select(data.X, data.Y, 6) == J);
  CHECK(loocv_select(data.X, data.Y, 1) == 1);
}

TEST_CASE("loocv_select: pure noise favors small k") {
  // zero slope: CV error should grow with k, so selected k stays small
  const GridPtr grid = Grid::uniform(31);
  const OrthoSystem trig = basis_trig(8, grid);
  int small = 0;
  const int runs = 200;
  RngStream rng{StreamKey(456)};
  for (int rep = 0; rep < runs; ++rep) {
    const int n = 30;
    MatrixXd coef_x(n, 8), coef_e(n, 8);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 8; ++j) {
        coef_x(i, j) = rng.normal() / (j + 1.0);
        coef_e(i, j) = rng.normal() / (j + 1.0);
      }
    }
    const FnSet x{grid, coef_x * trig.funcs};
    const FnSet y{grid, coef_e * trig.funcs};
    if (loocv_select(x, y, 5) <= 2) ++small;
  }
  CHECK(small >= static_cast<int>(0.8 * runs));
}

TEST_CASE("loocv_select: parallel folds match the serial reference") {
  const RankJData data = make_rank_j(24, 2, 11);
  CHECK(loocv_select(data.X, data.Y, 5, 1) ==
        loocv_select(data.X, data.Y, 5, 2));
}

TEST_CASE("fit_fofr: shape and truncation errors") {
  const GridPtr grid = Grid::uniform(21);
  RngStream rng{StreamKey(2)};
  MatrixXd xr(6, grid->size()), yr(5, grid->size());
  for (int i = 0; i < 6; ++i) xr.row(i) = random_curve(grid, rng).values;
  for (int i = 0; i < 5; ++i) yr.row(i) = random_curve(grid, rng).values;
  CHECK_THROWS_AS((void)fit_fofr(FnSet{grid, xr}, FnSet{grid, yr}, 1), Error);

  MatrixXd yr6 = xr;
  CHECK_THROWS_AS((void)fit_fofr(FnSet{grid, xr}, FnSet{grid, yr6}, 99),
                  Error);
}
