#pragma once

#include <optional>
#include <string>

#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/residualize.hpp"
#include "lcu/types.hpp"

namespace lcu {

// Relative floor below which a per-coordinate denominator is flagged
// degenerate instead of divided.
inline constexpr double kDenominatorFloor = 1e-10;

struct DebiasResult {
  Vector alpha_u;                 // generalized debiased coefficients
  Vector denominators;            // d_j = (1/n) Acheck_:j^T (I - P_j) A_:j
  Vector t_stats;                 // t(j, A, Y) = d_j * alpha_u_j
  std::vector<bool> degenerate;   // flagged coordinates (alpha_u/t not usable)
  std::optional<Vector> alpha_u_classic;
  std::string residualizer_id;
};

// Generalized debiased estimator with per-coordinate active-set projections.
DebiasResult debias_generalized(const Matrix& design, const Vector& response,
                                const LassoFit& fit, const Residualizer& residualizer);

// Classic degrees-of-freedom-adjusted estimator with a supplied precision:
// alpha + (1/(n-k)) Theta A^T R.
Vector debias_classic(const LassoFit& fit, const Matrix& design,
                      const Vector& response, const Matrix& precision);

struct DenominatorGaps {
  Vector gaps;          // |d_j - s_j (1 - k/n)| / s_j per coordinate
  double median = 0.0;
  double q90 = 0.0;
  double frac_within(double tol) const;
};

// Compare realized denominators against the Gaussian-design prediction
// Sigma_{j|\j} (1 - k/n).
DenominatorGaps gaussian_denominator_check(const DebiasResult& result,
                                           const LassoFit& fit,
                                           const Vector& conditional_variances);

}  // namespace lcu
