#pragma once

#include <memory>

#include "fofr/fungrid.hpp"

namespace fofr {

/// Empirical functional principal components of a regressor sample:
/// mean curve, non-increasing eigenvalues of the discretized covariance,
/// quadrature-orthonormal eigenfunctions, and the n x rank score matrix
/// <X_i - mean, phi_j>. Immutable after fit.
struct FpcaModel {
  Fn mean_fn;
  VectorXd eigvals;      // descending, >= 0, components below cutoff dropped
  OrthoSystem eigfns;    // rank x m
  MatrixXd scores;       // n x rank
  int n = 0;

  int rank() const { return static_cast<int>(eigvals.size()); }
};

using FpcaPtr = std::shared_ptr<const FpcaModel>;

/// Covariance route: form the m x m covariance kernel C with divisor n,
/// symmetrize as W^(1/2) C W^(1/2) with W = diag(weights), eigensolve, and
/// map eigenvectors back through W^(-1/2), which makes the eigenfunctions
/// exactly quadrature-orthonormal. Components with eigenvalue below
/// 1e-12 * gamma_1 are dropped; at most min(n-1, m) are retained. Each
/// eigenfunction is signed so its largest-magnitude coordinate is positive
/// (first such coordinate on ties).
FpcaModel fit_fpca(const FnSet& X);
FpcaPtr fit_fpca_shared(const FnSet& X);

/// The discretized covariance kernel itself (divisor n).
KernelOp covariance_kernel(const FnSet& X);

/// Throws truncation-too-large unless 1 <= h <= rank; warns when h splits a
/// near-tied eigenpair (gap below 1e-10 * gamma_1).
void check_truncation(const FpcaModel& model, int h, const char* where);

/// (<x - mean, phi_j>)_{j<=h}.
VectorXd scores_of(const FpcaModel& model, const Fn& x, int h);

/// t_hat_h(x) = sum_{j<=h} <x - mean, phi_j>^2 / gamma_j.
double scaling_hat(const FpcaModel& model, const Fn& x, int h);

/// sum_{j<=h} gamma_j^-1 <f, phi_j> phi_j (f is not centered).
Fn truncated_inverse_apply(const FpcaModel& model, const Fn& f, int h);

}  // namespace fofr
