#pragma once

#include <optional>

#include "fofr/fungrid.hpp"
#include "fofr/rng.hpp"

namespace fofr {

/// Spectrum gamma_j = 2 sum_{l>=j} l^-a built from the eigengaps
/// gamma_j - gamma_{j+1} = 2 j^-a.
struct SpectrumSpec {
  double a = 2.5;  // decay exponent, > 1
  int J0 = 20;     // component count
};

enum class LatentLaw { Normal, CenteredExp, None };
enum class WLaw { Normal, Rademacher };

/// Dependent-score law xi_j = xi * W_j: one latent draw per curve shared
/// across components, W_j iid. Scores are uncorrelated with unit variance
/// but not independent unless the latent is degenerate (None).
struct ScoreLaw {
  LatentLaw latent = LatentLaw::Normal;
  WLaw w = WLaw::Normal;
};

enum class SlopeKind { Prod, Diag, Exp };

struct SlopeSpec {
  SlopeKind kind = SlopeKind::Prod;
  double b1 = 1.5;
  double b2 = 2.5;
  std::uint64_t sign_seed = 0;  // Rademacher signs of the coefficients
};

/// Ground truth carried with generated data.
struct SimTruth {
  KernelOp slope;
  Fn intercept;
  Fn mu_x0;  // slope applied to x0 plus intercept
  Fn x0;
  VectorXd pop_eigvals;
};

struct Scenario {
  SpectrumSpec spectrum;
  ScoreLaw x_law;
  ScoreLaw e_law;
  SlopeSpec slope;
  int n = 100;
  int grid_m = 101;
  double error_scale = 1.0;
  std::optional<VectorXd> fixed_x0;  // fresh independent draw when absent
};

/// gamma_j for j = 1..J0: partial sum of l^-a to l = 10^6 plus the integral
/// remainder (10^6 + 1/2)^(1-a) / (a - 1); absolute error below 1e-10.
VectorXd eigenvalues_from_gaps(const SpectrumSpec& spec);

/// Curves sum_j sqrt(gamma_j) xi_ij phi_j with xi_ij = xi_i W_ij. Draw order
/// per curve: the latent first, then W_1..W_J.
FnSet gen_fnset(int n, const VectorXd& eigvals, const OrthoSystem& basis,
                const ScoreLaw& law, RngStream& rng);

/// The three slope operators on the trigonometric system: a rank-one tensor
/// of two coefficient curves, a diagonal operator, or the exp(-(t+s)) kernel.
/// Signs are drawn once from spec.sign_seed (first the b1 set, then the b2
/// set, then the diagonal set), so equal seeds give identical operators.
KernelOp make_slope(const SlopeSpec& spec, const OrthoSystem& trig);

/// Bases and the slope operator are fixed once per study and reused across
/// replications; per-replication randomness covers only scores and errors.
struct StudyContext {
  GridPtr grid;
  OrthoSystem basis_x;    // orthonormalized monomials
  OrthoSystem basis_eps;  // orthonormalized shifted Chebyshev system
  OrthoSystem trig;
  VectorXd eigvals;
  KernelOp slope;
  Fn intercept;  // zero curve
};

StudyContext make_study_context(const Scenario& scenario);

struct Dataset {
  FnSet X;
  FnSet Y;
  SimTruth truth;
};

/// Regressors on the monomial system, errors on the Chebyshev system,
/// Y_i = B X_i + intercept + scale * eps_i; x0 is a fresh regressor draw
/// unless the scenario fixes one. Draw order: X sample, error sample, x0.
Dataset gen_dataset(const StudyContext& ctx, const Scenario& scenario,
                    RngStream& rng);
Dataset gen_dataset(const Scenario& scenario, RngStream& rng);

}  // namespace fofr
