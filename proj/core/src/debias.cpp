#include "lcu/debias.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lcu {

DebiasResult debias_generalized(const Matrix& design, const Vector& response,
                                const LassoFit& fit,
                                const Residualizer& residualizer) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (fit.coefficients.size() != p || response.size() != n)
    throw std::invalid_argument("debias: dimension mismatch");
  if (fit.k >= n)
    throw std::invalid_argument("debias: active set as large as sample size");
  const double dn = static_cast<double>(n);

  const ProjectionFamily family(design, fit.active_set);
  const Matrix mu = residualizer.mu_matrix(design);

  DebiasResult out;
  out.residualizer_id = residualizer.id();
  out.alpha_u = Vector::Zero(p);
  out.denominators = Vector::Zero(p);
  out.t_stats = Vector::Zero(p);
  out.degenerate.assign(static_cast<std::size_t>(p), false);

  Index usable = 0;
  for (Index j = 0; j < p; ++j) {
    const Vector checked = design.col(j) - mu.col(j);
    const Vector u = family.residual_column(j);  // (I - P_j) A_:j
    const double d = checked.dot(u) / dn;
    const double floor = kDenominatorFloor * design.col(j).squaredNorm() / dn;
    out.denominators[j] = d;
    if (std::abs(d) < floor) {
      out.degenerate[static_cast<std::size_t>(j)] = true;
      continue;
    }
    const double corr = checked.dot(fit.residual) / dn;
    out.alpha_u[j] = fit.coefficients[j] + corr / d;
    out.t_stats[j] = d * out.alpha_u[j];
    ++usable;
  }
  if (usable == 0)
    throw std::runtime_error("debias: all coordinates degenerate");
  return out;
}

Vector debias_classic(const LassoFit& fit, const Matrix& design,
                      const Vector& response, const Matrix& precision) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (precision.rows() != p || precision.cols() != p)
    throw std::invalid_argument("debias_classic: precision dimension mismatch");
  if (fit.k >= n)
    throw std::invalid_argument("debias_classic: k >= n");
  const Vector residual = response - design * fit.coefficients;
  return fit.coefficients +
         precision * (design.transpose() * residual) /
             static_cast<double>(n - fit.k);
}

double DenominatorGaps::frac_within(double tol) const {
  if (gaps.size() == 0) return 0.0;
  Index c = 0;
  for (Index j = 0; j < gaps.size(); ++j)
    if (gaps[j] <= tol) ++c;
  return static_cast<double>(c) / static_cast<double>(gaps.size());
}

DenominatorGaps gaussian_denominator_check(const DebiasResult& result,
                                           const LassoFit& fit,
                                           const Vector& conditional_variances) {
  const Index p = result.denominators.size();
  if (conditional_variances.size() != p)
    throw std::invalid_argument("denominator_check: length mismatch");
  const Index n = fit.residual.size();
  const double shrink = 1.0 - static_cast<double>(fit.k) / static_cast<double>(n);
  DenominatorGaps out;
  out.gaps = Vector::Zero(p);
  std::vector<double> sorted;
  sorted.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const double s = conditional_variances[j];
    if (s <= 0.0)
      throw std::invalid_argument("denominator_check: nonpositive variance");
    out.gaps[j] = std::abs(result.denominators[j] - s * shrink) / s;
    sorted.push_back(out.gaps[j]);
  }
  std::sort(sorted.begin(), sorted.end());
  out.median = sorted[sorted.size() / 2];
  out.q90 = sorted[static_cast<std::size_t>(0.9 * static_cast<double>(sorted.size() - 1))];
  return out;
}

}  // namespace lcu
