#pragma once

#include "fofr/fpca.hpp"

namespace fofr {

/// Truncated functional principal components regression fit. The slope acts
/// as B_h x = sum_{j<=h} <x, phi_j> row_j with row_j the cross-covariance
/// applied to phi_j over gamma_j; the intercept is ybar - B_h xbar.
struct FofrModel {
  FpcaPtr fpca;
  int h = 0;
  Fn intercept;
  MatrixXd slope_coefs;  // h x m
  Fn ybar;
};

FofrModel fit_fofr(const FnSet& X, const FnSet& Y, int h);

/// Same fit reusing an already-computed FPCA of X (bootstrap resamples and
/// cross-validation folds share the eigensystem where it is unchanged).
FofrModel fit_fofr_with(FpcaPtr fpca, const FnSet& Y, int h);

Fn predict_mean(const FofrModel& model, const Fn& x);
FnSet predict_mean_all(const FofrModel& model, const FnSet& X);

/// Kernel view B(t,s) = sum_j row_j(t) phi_j(s), exported on demand.
KernelOp slope_kernel(const FofrModel& model);

/// n^-1 sum_i ||Y_i - mu(X_i)||^2 under the quadrature.
double in_sample_mse(const FofrModel& model, const FnSet& X, const FnSet& Y);

struct ResidualSet {
  FnSet residuals;
  bool centered = false;
  int k = 0;  // truncation the residuals were computed at
};

ResidualSet residuals_of(const FofrModel& model, const FnSet& X,
                         const FnSet& Y, bool center = true);

/// n^-1 sum_i eps_i (x) eps_i as a kernel; symmetric positive semidefinite.
KernelOp error_cov(const ResidualSet& res);

/// Leave-one-out truncation choice: the k in 1..k_max minimizing
/// n^-1 sum_i ||Y_i - mu_k^(-i)(X_i)||^2 over n full refits (the FPCA is
/// refit per fold), ties broken toward smaller k. k_max is capped by the
/// smallest fold rank.
int loocv_select(const FnSet& X, const FnSet& Y, int k_max, int threads = 0);

}  // namespace fofr
