#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "fofr/error.hpp"

namespace fofr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// A quadrature grid on [0,1]: strictly increasing points with positive
/// trapezoid weights derived from the spacings. Every curve in one analysis
/// shares a single Grid; nothing here interpolates between grids.
class Grid {
 public:
  /// m >= 3 equispaced points including both endpoints, trapezoid weights
  /// (h/2, h, ..., h, h/2) with h = 1/(m-1) up to one rounding of the points.
  static GridPtr uniform(int m);

  /// Trapezoid weights from arbitrary strictly increasing points in [0,1].
  static GridPtr from_points(VectorXd points);

  const VectorXd& points() const { return points_; }
  const VectorXd& weights() const { return weights_; }
  int size() const { return static_cast<int>(points_.size()); }

  /// Grids are interchangeable when they are the same object or hold
  /// bitwise-equal points (weights are a function of the points).
  static bool same(const GridPtr& a, const GridPtr& b);

 private:
  explicit Grid(VectorXd points);

  VectorXd points_;
  VectorXd weights_;
};

void check_same_grid(const GridPtr& a, const GridPtr& b, const char* where);

/// A curve: its values on a shared grid.
struct Fn {
  GridPtr grid;
  VectorXd values;
};

/// n curves on one grid, one per row.
struct FnSet {
  GridPtr grid;
  MatrixXd rows;  // n x m

  int n() const { return static_cast<int>(rows.rows()); }
  Fn row(int i) const { return Fn{grid, rows.row(i).transpose()}; }
  Fn mean() const { return Fn{grid, rows.colwise().mean().transpose()}; }
};

/// A bivariate kernel K(t_r, t_c) standing for the integral operator
/// (K f)(t) = sum_c w_c K(t, t_c) f(t_c); quadrature runs over the second
/// index.
struct KernelOp {
  GridPtr grid;
  MatrixXd kernel;  // m x m
};

/// Functions orthonormal under the grid quadrature, one per row.
struct OrthoSystem {
  GridPtr grid;
  MatrixXd funcs;  // J x m

  int count() const { return static_cast<int>(funcs.rows()); }
  Fn fn(int j) const { return Fn{grid, funcs.row(j).transpose()}; }
};

double inner(const Fn& f, const Fn& g);
double norm(const Fn& f);

/// Classical Gram-Schmidt in the quadrature inner product, in input order,
/// with one reorthogonalization pass so the output stays orthonormal to
/// machine precision even for ill-conditioned inputs. A curve whose residual
/// after the first projection pass has norm <= tol times the curve's own norm
/// raises degenerate-input naming the offending (1-based) index.
OrthoSystem gram_schmidt(const std::vector<Fn>& raw, double tol = 1e-10);

/// Orthonormalized t, t^2, ..., t^J. 1 <= J <= 20.
OrthoSystem basis_monomial(int J, const GridPtr& grid);

/// Chebyshev-style recurrence f_j(s) = 2 s f_{j-1}(s) + f_{j-2}(s) with
/// f_0 = 1, f_1 = s (note the plus sign), evaluated at s = 2t - 1 for
/// j = 1..J and then orthonormalized. Either sign of the recurrence spans a
/// degree-graded polynomial space; both variants pass the orthonormality
/// validation after Gram-Schmidt. 1 <= J <= 20.
OrthoSystem basis_chebyshev_shifted(int J, const GridPtr& grid);

/// Interleaved sqrt(2) sin(2m pi t), sqrt(2) cos(2m pi t), m = 1..J/2,
/// already orthonormal under the quadrature. J must be even.
OrthoSystem basis_trig(int J, const GridPtr& grid);

/// Kernel K(t,s) = y(t) x(s), so apply_op(K, z) = <z, x> y.
KernelOp tensor_product(const Fn& x, const Fn& y);

Fn apply_op(const KernelOp& op, const Fn& f);

/// (sum_r sum_c w_r w_c K(t_r,t_c)^2)^(1/2).
double hs_norm(const KernelOp& op);

/// <K x, x> under the quadrature, clamped at 0 for PSD kernels.
double kernel_quad_form(const KernelOp& op, const Fn& x);

/// Segment index i and fraction u with t ~= (1-u) p_i + u p_{i+1}, clamped
/// to the covered range. Errors if t is outside [0,1].
std::pair<int, double> interp_locate(const Grid& grid, double t);

/// Value at t in [0,1] by linear interpolation between the two neighboring
/// grid points (constant beyond the first/last point).
double eval_at(const Fn& f, double t);

/// Kernel diagonal K(t,t), linearly interpolated along the diagonal values.
double kernel_diag_at(const KernelOp& op, double t);

}  // namespace fofr
