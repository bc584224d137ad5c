#include "fofr/fpca.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace fofr {

KernelOp covariance_kernel(const FnSet& X) {
  const int n = X.n();
  MatrixXd centered = X.rows.rowwise() - X.rows.colwise().mean();
  return KernelOp{X.grid, (centered.transpose() * centered) / n};
}

FpcaModel fit_fpca(const FnSet& X) {
  const int n = X.n();
  const int m = X.grid->size();
  if (n < 2) {
    fail(ErrorKind::InvalidArgument, "fit_fpca: needs at least 2 curves");
  }

  FpcaModel model;
  model.n = n;
  model.mean_fn = X.mean();

  MatrixXd centered = X.rows.rowwise() - X.rows.colwise().mean();
  const VectorXd sqrt_w = X.grid->weights().array().sqrt();

  // S = W^(1/2) C W^(1/2), C = n^-1 Xc' Xc
  MatrixXd s = (centered.transpose() * centered) / n;
  s = sqrt_w.asDiagonal() * s * sqrt_w.asDiagonal();

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(s);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::NumericalFailure, "fit_fpca: eigensolver did not converge");
  }

  // ascending from Eigen; retain descending above the numerical-rank cutoff
  const VectorXd& vals = solver.eigenvalues();
  const double top = std::max(vals[m - 1], 0.0);
  const double cutoff = 1e-12 * top;
  const int max_rank = std::min(n - 1, m);
  int rank = 0;
  for (int j = m - 1; j >= 0 && rank < max_rank; --j) {
    const double v = std::max(vals[j], 0.0);
    if (v <= 0.0 || v < cutoff) break;
    ++rank;
  }

  model.eigvals.resize(rank);
  MatrixXd funcs(rank, m);
  const VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  for (int j = 0; j < rank; ++j) {
    model.eigvals[j] = std::max(vals[m - 1 - j], 0.0);
    VectorXd phi =
        solver.eigenvectors().col(m - 1 - j).cwiseProduct(inv_sqrt_w);
    // sign convention: largest-magnitude coordinate positive, earliest wins
    int arg = 0;
    double best = std::abs(phi[0]);
    for (int r = 1; r < m; ++r) {
      const double a = std::abs(phi[r]);
      if (a > best) {
        best = a;
        arg = r;
      }
    }
    if (phi[arg] < 0.0) phi = -phi;
    funcs.row(j) = phi.transpose();
  }
  model.eigfns = OrthoSystem{X.grid, std::move(funcs)};

  // scores(i,j) = sum_r w_r Xc(i,r) phi_j(r)
  model.scores =
      centered * X.grid->weights().asDiagonal() * model.eigfns.funcs.transpose();
  return model;
}

FpcaPtr fit_fpca_shared(const FnSet& X) {
  return std::make_shared<const FpcaModel>(fit_fpca(X));
}

void check_truncation(const FpcaModel& model, int h, const char* where) {
  if (h < 1 || h > model.rank()) {
    fail(ErrorKind::TruncationTooLarge,
         std::string(where) + ": truncation " + std::to_string(h) +
             " outside the numerical rank " + std::to_string(model.rank()));
  }
  if (h < model.rank() && model.rank() > 0) {
    const double gap = model.eigvals[h - 1] - model.eigvals[h];
    if (gap < 1e-10 * model.eigvals[0]) {
      warn("truncation " + std::to_string(h) +
           " splits a near-tied eigenvalue pair");
    }
  }
}

VectorXd scores_of(const FpcaModel& model, const Fn& x, int h) {
  check_same_grid(model.mean_fn.grid, x.grid, "scores_of");
  check_truncation(model, h, "scores_of");
  const VectorXd centered_w = (x.values - model.mean_fn.values)
                                  .cwiseProduct(x.grid->weights());
  return model.eigfns.funcs.topRows(h) * centered_w;
}

double scaling_hat(const FpcaModel& model, const Fn& x, int h) {
  const VectorXd s = scores_of(model, x, h);
  return (s.array().square() / model.eigvals.head(h).array()).sum();
}

Fn truncated_inverse_apply(const FpcaModel& model, const Fn& f, int h) {
  check_same_grid(model.mean_fn.grid, f.grid, "truncated_inverse_apply");
  check_truncation(model, h, "truncated_inverse_apply");
  const VectorXd fw = f.values.cwiseProduct(f.grid->weights());
  const VectorXd coef =
      (model.eigfns.funcs.topRows(h) * fw).array() /
      model.eigvals.head(h).array();
  return Fn{f.grid, model.eigfns.funcs.topRows(h).transpose() * coef};
}

}  // namespace fofr
