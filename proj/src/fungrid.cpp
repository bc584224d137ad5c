#include "fofr/fungrid.hpp"

#include <cmath>
#include <string>

namespace fofr {

Grid::Grid(VectorXd points) : points_(std::move(points)) {
  const int m = static_cast<int>(points_.size());
  if (m < 2) {
    fail(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  }
  if (points_[0] < 0.0 || points_[m - 1] > 1.0) {
    fail(ErrorKind::InvalidArgument, "grid points must lie in [0,1]");
  }
  for (int i = 1; i < m; ++i) {
    if (!(points_[i] > points_[i - 1])) {
      fail(ErrorKind::InvalidArgument,
           "grid points must be strictly increasing (violated at index " +
               std::to_string(i + 1) + ")");
    }
  }
  weights_.resize(m);
  weights_[0] = (points_[1] - points_[0]) / 2.0;
  for (int i = 1; i < m - 1; ++i) {
    weights_[i] = (points_[i + 1] - points_[i - 1]) / 2.0;
  }
  weights_[m - 1] = (points_[m - 1] - points_[m - 2]) / 2.0;
}

GridPtr Grid::uniform(int m) {
  if (m < 3) {
    fail(ErrorKind::InvalidArgument, "uniform grid needs m >= 3");
  }
  VectorXd pts(m);
  for (int i = 0; i < m; ++i) pts[i] = static_cast<double>(i) / (m - 1);
  return from_points(std::move(pts));
}

GridPtr Grid::from_points(VectorXd points) {
  return GridPtr(new Grid(std::move(points)));
}

bool Grid::same(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->points_.size() == b->points_.size() && a->points_ == b->points_;
}

void check_same_grid(const GridPtr& a, const GridPtr& b, const char* where) {
  if (!Grid::same(a, b)) {
    fail(ErrorKind::IncompatibleGrid,
         std::string(where) + ": curves live on different grids");
  }
}

double inner(const Fn& f, const Fn& g) {
  check_same_grid(f.grid, g.grid, "inner");
  return (f.values.array() * g.values.array() * f.grid->weights().array())
      .sum();
}

double norm(const Fn& f) {
  double s =
      (f.values.array().square() * f.grid->weights().array()).sum();
  return std::sqrt(std::max(s, 0.0));
}

namespace {

// Gram-Schmidt over the rows of `raw` under the quadrature of `grid`.
MatrixXd gram_schmidt_rows(const GridPtr& grid, const MatrixXd& raw,
                           double tol) {
  const auto& w = grid->weights();
  const int J = static_cast<int>(raw.rows());
  const int m = static_cast<int>(raw.cols());
  MatrixXd q(J, m);
  auto dot = [&](const VectorXd& a, const VectorXd& b) {
    return (a.array() * b.array() * w.array()).sum();
  };
  for (int j = 0; j < J; ++j) {
    VectorXd v = raw.row(j).transpose();
    const double raw_norm = std::sqrt(std::max(dot(v, v), 0.0));
    if (!(raw_norm > 0.0)) {
      fail(ErrorKind::DegenerateInput,
           "gram_schmidt: zero curve at index " + std::to_string(j + 1));
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        const VectorXd qi = q.row(i).transpose();
        v -= dot(v, qi) * qi;
      }
      if (pass == 0) {
        const double resid = std::sqrt(std::max(dot(v, v), 0.0));
        if (resid <= tol * raw_norm) {
          fail(ErrorKind::DegenerateInput,
               "gram_schmidt: near-dependent curve at index " +
                   std::to_string(j + 1));
        }
      }
    }
    v /= std::sqrt(dot(v, v));
    q.row(j) = v.transpose();
  }
  return q;
}

// Relaxed dependence threshold for the built-in polynomial bases: at J = 20
// the residual of the last monomial against the span of the previous ones is
// ~5e-12 of its norm, below the default threshold, while true duplicates
// still cancel down to rounding noise (~1e-15).
constexpr double kBasisTol = 1e-13;

}  // namespace

OrthoSystem gram_schmidt(const std::vector<Fn>& raw, double tol) {
  if (raw.empty()) {
    fail(ErrorKind::InvalidArgument, "gram_schmidt: empty input");
  }
  const GridPtr grid = raw.front().grid;
  MatrixXd rows(static_cast<int>(raw.size()), grid->size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    check_same_grid(grid, raw[j].grid, "gram_schmidt");
    rows.row(static_cast<int>(j)) = raw[j].values.transpose();
  }
  return OrthoSystem{grid, gram_schmidt_rows(grid, rows, tol)};
}

OrthoSystem basis_monomial(int J, const GridPtr& grid) {
  if (J < 1 || J > 20) {
    fail(ErrorKind::InvalidArgument, "basis_monomial: J must be in 1..20");
  }
  const int m = grid->size();
  MatrixXd raw(J, m);
  for (int i = 0; i < m; ++i) {
    const double t = grid->points()[i];
    double p = 1.0;
    for (int j = 0; j < J; ++j) {
      p *= t;
      raw(j, i) = p;
    }
  }
  return OrthoSystem{grid, gram_schmidt_rows(grid, raw, kBasisTol)};
}

OrthoSystem basis_chebyshev_shifted(int J, const GridPtr& grid) {
  if (J < 1 || J > 20) {
    fail(ErrorKind::InvalidArgument,
         "basis_chebyshev_shifted: J must be in 1..20");
  }
  const int m = grid->size();
  MatrixXd raw(J, m);
  for (int i = 0; i < m; ++i) {
    const double s = 2.0 * grid->points()[i] - 1.0;
    double fm2 = 1.0;  // f_0
    double fm1 = s;    // f_1
    raw(0, i) = fm1;
    for (int j = 2; j <= J; ++j) {
      const double f = 2.0 * s * fm1 + fm2;
      raw(j - 1, i) = f;
      fm2 = fm1;
      fm1 = f;
    }
  }
  return OrthoSystem{grid, gram_schmidt_rows(grid, raw, kBasisTol)};
}

OrthoSystem basis_trig(int J, const GridPtr& grid) {
  if (J < 2 || J % 2 != 0) {
    fail(ErrorKind::InvalidArgument, "basis_trig: J must be even and >= 2");
  }
  const int m = grid->size();
  const double sqrt2 = std::sqrt(2.0);
  MatrixXd funcs(J, m);
  for (int half = 1; half <= J / 2; ++half) {
    for (int i = 0; i < m; ++i) {
      const double arg = 2.0 * half * M_PI * grid->points()[i];
      funcs(2 * half - 2, i) = sqrt2 * std::sin(arg);
      funcs(2 * half - 1, i) = sqrt2 * std::cos(arg);
    }
  }
  return OrthoSystem{grid, std::move(funcs)};
}

KernelOp tensor_product(const Fn& x, const Fn& y) {
  check_same_grid(x.grid, y.grid, "tensor_product");
  return KernelOp{x.grid, y.values * x.values.transpose()};
}

Fn apply_op(const KernelOp& op, const Fn& f) {
  check_same_grid(op.grid, f.grid, "apply_op");
  VectorXd weighted = f.values.array() * op.grid->weights().array();
  return Fn{op.grid, op.kernel * weighted};
}

double hs_norm(const KernelOp& op) {
  const auto& w = op.grid->weights();
  const double s = w.transpose() * op.kernel.array().square().matrix() * w;
  return std::sqrt(std::max(s, 0.0));
}

double kernel_quad_form(const KernelOp& op, const Fn& x) {
  check_same_grid(op.grid, x.grid, "kernel_quad_form");
  const VectorXd xw = x.values.cwiseProduct(op.grid->weights());
  return std::max(0.0, xw.dot(op.kernel * xw));
}

std::pair<int, double> interp_locate(const Grid& grid, double t) {
  if (t < 0.0 || t > 1.0) {
    fail(ErrorKind::InvalidArgument, "evaluation point outside [0,1]");
  }
  const auto& p = grid.points();
  const int m = grid.size();
  if (t <= p[0]) return {0, 0.0};
  if (t >= p[m - 1]) return {m - 2, 1.0};
  int lo = 0, hi = m - 1;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    (p[mid] <= t ? lo : hi) = mid;
  }
  return {lo, (t - p[lo]) / (p[lo + 1] - p[lo])};
}

double eval_at(const Fn& f, double t) {
  auto [i, u] = interp_locate(*f.grid, t);
  return (1.0 - u) * f.values[i] + u * f.values[i + 1];
}

double kernel_diag_at(const KernelOp& op, double t) {
  auto [i, u] = interp_locate(*op.grid, t);
  return (1.0 - u) * op.kernel(i, i) + u * op.kernel(i + 1, i + 1);
}

}  // namespace fofr
