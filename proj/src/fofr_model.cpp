#include "fofr/fofr_model.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fofr/parallel.hpp"

namespace fofr {

FofrModel fit_fofr(const FnSet& X, const FnSet& Y, int h) {
  return fit_fofr_with(fit_fpca_shared(X), Y, h);
}

FofrModel fit_fofr_with(FpcaPtr fpca, const FnSet& Y, int h) {
  if (!fpca) {
    fail(ErrorKind::InvalidArgument, "fit_fofr: missing FPCA");
  }
  check_same_grid(fpca->mean_fn.grid, Y.grid, "fit_fofr");
  if (Y.n() != fpca->n) {
    fail(ErrorKind::InvalidArgument,
         "fit_fofr: regressor and response sample sizes differ");
  }
  check_truncation(*fpca, h, "fit_fofr");

  FofrModel model;
  model.fpca = std::move(fpca);
  model.h = h;
  model.ybar = Y.mean();

  const int n = Y.n();
  MatrixXd y_centered = Y.rows.rowwise() - Y.rows.colwise().mean();
  // row_j = gamma_j^-1 n^-1 sum_i <X_i - xbar, phi_j> (Y_i - ybar)
  model.slope_coefs =
      (model.fpca->scores.leftCols(h).transpose() * y_centered) / n;
  model.slope_coefs.array().colwise() /=
      model.fpca->eigvals.head(h).array();

  // intercept = ybar - B_h xbar, with B_h applied to the raw mean curve
  const VectorXd xbar_w = model.fpca->mean_fn.values.cwiseProduct(
      model.fpca->mean_fn.grid->weights());
  const VectorXd xbar_proj = model.fpca->eigfns.funcs.topRows(h) * xbar_w;
  model.intercept =
      Fn{Y.grid, model.ybar.values - model.slope_coefs.transpose() * xbar_proj};
  return model;
}

Fn predict_mean(const FofrModel& model, const Fn& x) {
  check_same_grid(model.intercept.grid, x.grid, "predict_mean");
  const VectorXd xw = x.values.cwiseProduct(x.grid->weights());
  const VectorXd proj = model.fpca->eigfns.funcs.topRows(model.h) * xw;
  return Fn{x.grid,
            model.intercept.values + model.slope_coefs.transpose() * proj};
}

FnSet predict_mean_all(const FofrModel& model, const FnSet& X) {
  check_same_grid(model.intercept.grid, X.grid, "predict_mean");
  const MatrixXd proj = X.rows * X.grid->weights().asDiagonal() *
                        model.fpca->eigfns.funcs.topRows(model.h).transpose();
  MatrixXd out = proj * model.slope_coefs;
  out.rowwise() += model.intercept.values.transpose();
  return FnSet{X.grid, std::move(out)};
}

KernelOp slope_kernel(const FofrModel& model) {
  return KernelOp{model.intercept.grid,
                  model.slope_coefs.transpose() *
                      model.fpca->eigfns.funcs.topRows(model.h)};
}

double in_sample_mse(const FofrModel& model, const FnSet& X, const FnSet& Y) {
  const FnSet fitted = predict_mean_all(model, X);
  const MatrixXd diff = Y.rows - fitted.rows;
  return (diff.array().square().matrix() * Y.grid->weights()).sum() / Y.n();
}

ResidualSet residuals_of(const FofrModel& model, const FnSet& X,
                         const FnSet& Y, bool center) {
  check_same_grid(X.grid, Y.grid, "residuals_of");
  if (X.n() != Y.n()) {
    fail(ErrorKind::InvalidArgument,
         "residuals_of: regressor and response sample sizes differ");
  }
  const FnSet fitted = predict_mean_all(model, X);
  MatrixXd res = Y.rows - fitted.rows;
  if (center) {
    res.rowwise() -= res.colwise().mean().eval();
  }
  return ResidualSet{FnSet{Y.grid, std::move(res)}, center, model.h};
}

KernelOp error_cov(const ResidualSet& res) {
  const int n = res.residuals.n();
  if (n < 2) {
    fail(ErrorKind::InvalidArgument, "error_cov: needs at least 2 residuals");
  }
  return KernelOp{res.residuals.grid,
                  (res.residuals.rows.transpose() * res.residuals.rows) / n};
}

int loocv_select(const FnSet& X, const FnSet& Y, int k_max, int threads) {
  const int n = X.n();
  check_same_grid(X.grid, Y.grid, "loocv_select");
  if (n < 3) {
    fail(ErrorKind::InvalidArgument, "loocv_select: needs at least 3 curves");
  }
  if (X.n() != Y.n()) {
    fail(ErrorKind::InvalidArgument,
         "loocv_select: regressor and response sample sizes differ");
  }
  if (k_max < 1) {
    fail(ErrorKind::InvalidArgument, "loocv_select: k_max must be >= 1");
  }

  const int m = X.grid->size();
  const auto& w = X.grid->weights();
  // errs(i, k-1) = ||Y_i - mu_k^(-i)(X_i)||^2; fold_rank caps usable k
  MatrixXd errs = MatrixXd::Constant(n, k_max,
                                     std::numeric_limits<double>::quiet_NaN());
  std::vector<int> fold_rank(n, 0);

  parallel_for(
      n,
      [&](std::ptrdiff_t i) {
        MatrixXd xr(n - 1, m), yr(n - 1, m);
        xr.topRows(i) = X.rows.topRows(i);
        xr.bottomRows(n - 1 - i) = X.rows.bottomRows(n - 1 - i);
        yr.topRows(i) = Y.rows.topRows(i);
        yr.bottomRows(n - 1 - i) = Y.rows.bottomRows(n - 1 - i);
        const FnSet xfold{X.grid, std::move(xr)};
        const FnSet yfold{Y.grid, std::move(yr)};

        const FpcaModel fpca = fit_fpca(xfold);
        const int kcap = std::min(k_max, fpca.rank());
        fold_rank[i] = kcap;
        if (kcap < 1) return;

        // held-out prediction error, incrementally over k
        const VectorXd s = scores_of(fpca, X.row(static_cast<int>(i)), kcap);
        MatrixXd y_centered = yfold.rows.rowwise() - yfold.rows.colwise().mean();
        const MatrixXd cross =
            (fpca.scores.leftCols(kcap).transpose() * y_centered) / (n - 1);
        VectorXd cur = Y.rows.row(i).transpose() -
                       yfold.rows.colwise().mean().transpose();
        for (int k = 1; k <= kcap; ++k) {
          cur -= (s[k - 1] / fpca.eigvals[k - 1]) * cross.row(k - 1).transpose();
          errs(i, k - 1) = (cur.array().square() * w.array()).sum();
        }
      },
      threads);

  int k_usable = k_max;
  for (int i = 0; i < n; ++i) k_usable = std::min(k_usable, fold_rank[i]);
  if (k_usable < 1) {
    fail(ErrorKind::NumericalFailure,
         "loocv_select: a fold has numerical rank 0");
  }

  int best_k = 1;
  double best = errs.col(0).sum() / n;
  for (int k = 2; k <= k_usable; ++k) {
    const double cv = errs.col(k - 1).sum() / n;
    if (cv < best) {
      best = cv;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace fofr
