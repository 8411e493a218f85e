#pragma once

#include <optional>

#include "lcu/rng.hpp"
#include "lcu/types.hpp"

namespace lcu {

// Covariance/precision bundle for a Gaussian row model, plus optional knockoff
// diagonal s for the joint construction.
struct GaussianDesignModel {
  Matrix sigma;
  Matrix theta;                  // sigma^{-1}
  Matrix chol_sigma;             // lower-triangular factor of sigma
  Vector conditional_variances;  // 1 / theta_jj
  std::optional<Vector> knockoff_s;

  static GaussianDesignModel FromCovariance(Matrix sigma);
  static GaussianDesignModel FromPrecision(Matrix theta);

  Index dim() const { return sigma.rows(); }
  // max-norm of Sigma Theta - I (consistency check).
  double inverse_residual() const;
};

// Sigma_ij = rho^{|i-j|}.
Matrix ar1_covariance(Index p, double rho);

// Theta = a_p (E + eps I), Sigma in closed form; returns a model with both.
GaussianDesignModel equicorrelated_from_precision(Index p, double a_p, double eps);

// n i.i.d. N(0, Sigma) rows.
Matrix sample_design(Index n, const GaussianDesignModel& model, Rng& rng);

// One conditional resample of column j given the others:
// B_:j = mu_:j + sqrt(1/theta_jj) z.
Vector conditional_column_sample(const Matrix& design, Index j,
                                 const GaussianDesignModel& model, Rng& rng);
// Variant reusing a precomputed centering column.
Vector conditional_column_sample_mu(const Vector& mu_col, double theta_jj, Rng& rng);

// Conditional resample with 3-point innovations: +-(xi)^{-1/2} with
// probability xi/2 each, 0 otherwise (mean 0, variance 1).
Vector three_point_column_sample(const Matrix& design, Index j,
                                 const GaussianDesignModel& model, double xi,
                                 Rng& rng);
Vector three_point_column_sample_mu(const Vector& mu_col, double theta_jj,
                                    double xi, Rng& rng);

// Y = A alpha + w, w i.i.d. N(0, noise_variance).
Vector generate_response(const Matrix& design, const Vector& coefficients,
                         double noise_variance, Rng& rng);

enum class CoefSpec { gaussian_support, fixed_amplitude };

struct SparseCoefficients {
  Vector values;
  IndexList support;  // ground-truth H1
};

// gaussian_support: first s entries N(0,1); fixed_amplitude: random s-subset
// set to amplitude (already divided by sqrt(n) by the caller if desired).
SparseCoefficients sparse_coefficients(Index p, Index s, CoefSpec spec,
                                       double amplitude, Rng& rng);

// Equi-knockoff s for the equicorrelated precision a_p (E + eps I).
double eq_knockoff_s(Index p, double a_p, double eps);

// Sample a knockoff matrix: rows of (A, Atilde) jointly Gaussian with block
// covariance [[Sigma, Sigma - diag(s)], [Sigma - diag(s), Sigma]].
Matrix model_x_knockoff_sample(const Matrix& design,
                               const GaussianDesignModel& model, Rng& rng);

struct KnockoffPrecisionDiag {
  Vector diagonals;          // of (2 diag(s) - diag(s) Theta diag(s))^{-1}
  double fraction_exceeding = 0.0;
};

// Diagonals of the knockoff-block precision Schur complement and the fraction
// exceeding the threshold. A small diagonal perturbation may be supplied for
// singular precision inputs.
KnockoffPrecisionDiag knockoff_precision_diagnostic(const Matrix& theta,
                                                    const Vector& s,
                                                    double threshold,
                                                    double perturb = 0.0);

}  // namespace lcu
