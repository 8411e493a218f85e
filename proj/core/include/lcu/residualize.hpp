#pragma once

#include <string>
#include <utility>

#include "lcu/types.hpp"

namespace lcu {

enum class ResidualStrategy { zero, ols_projection, gaussian_conditional, custom };

// Strategy producing the centering columns mu_:j used to residualize design
// columns. gaussian_conditional carries the model precision Theta; custom
// carries an explicit n x p matrix of centering columns.
class Residualizer {
 public:
  static Residualizer Zero();
  static Residualizer OlsProjection();
  static Residualizer GaussianConditional(Matrix precision);
  static Residualizer Custom(Matrix mu);

  ResidualStrategy strategy() const { return strategy_; }
  std::string id() const;

  // Centering column mu_:j for the given design.
  Vector mu_column(const Matrix& design, Index j) const;

  // All centering columns as an n x p matrix. For gaussian_conditional this is
  // A - (A Theta) diag(Theta)^{-1}, computed with one matrix product.
  Matrix mu_matrix(const Matrix& design) const;

  const Matrix& precision() const { return precision_; }

 private:
  explicit Residualizer(ResidualStrategy s) : strategy_(s) {}
  ResidualStrategy strategy_;
  Matrix precision_;
  Matrix custom_mu_;
};

// (mu_:j, checked column A_:j - mu_:j).
std::pair<Vector, Vector> residual_columns(const Residualizer& residualizer,
                                           const Matrix& design, Index j);

}  // namespace lcu
