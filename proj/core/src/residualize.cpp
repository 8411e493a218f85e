#include "lcu/residualize.hpp"

#include <stdexcept>

namespace lcu {

Residualizer Residualizer::Zero() { return Residualizer(ResidualStrategy::zero); }

Residualizer Residualizer::OlsProjection() {
  return Residualizer(ResidualStrategy::ols_projection);
}

Residualizer Residualizer::GaussianConditional(Matrix precision) {
  if (precision.rows() != precision.cols())
    throw std::invalid_argument("residualizer: precision must be square");
  if ((precision - precision.transpose()).lpNorm<Eigen::Infinity>() >
      1e-8 * precision.lpNorm<Eigen::Infinity>())
    throw std::invalid_argument("residualizer: precision must be symmetric");
  Residualizer r(ResidualStrategy::gaussian_conditional);
  r.precision_ = std::move(precision);
  return r;
}

Residualizer Residualizer::Custom(Matrix mu) {
  Residualizer r(ResidualStrategy::custom);
  r.custom_mu_ = std::move(mu);
  return r;
}

std::string Residualizer::id() const {
  switch (strategy_) {
    case ResidualStrategy::zero: return "zero";
    case ResidualStrategy::ols_projection: return "ols_projection";
    case ResidualStrategy::gaussian_conditional: return "gaussian_conditional";
    case ResidualStrategy::custom: return "custom";
  }
  return "unknown";
}

Vector Residualizer::mu_column(const Matrix& design, Index j) const {
  const Index n = design.rows();
  const Index p = design.cols();
  if (j < 0 || j >= p)
    throw std::invalid_argument("residualizer: column index out of range");
  switch (strategy_) {
    case ResidualStrategy::zero:
      return Vector::Zero(n);
    case ResidualStrategy::ols_projection: {
      // Projection of A_:j onto col(A_:\j) via normal equations.
      Matrix rest(n, p - 1);
      Index c = 0;
      for (Index l = 0; l < p; ++l)
        if (l != j) rest.col(c++) = design.col(l);
      Eigen::LDLT<Matrix> ldlt(rest.transpose() * rest);
      if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("residualizer: rank-deficient A_:\\j");
      const Vector coef = ldlt.solve(rest.transpose() * design.col(j));
      return rest * coef;
    }
    case ResidualStrategy::gaussian_conditional: {
      if (precision_.rows() != p)
        throw std::invalid_argument("residualizer: precision dimension mismatch");
      // mu_:j = -A_:\j Theta_{\j,j} / Theta_jj = A_:j - (A Theta_:j) / Theta_jj
      const double tjj = precision_(j, j);
      if (tjj <= 0.0)
        throw std::runtime_error("residualizer: nonpositive precision diagonal");
      return design.col(j) - design * precision_.col(j) / tjj;
    }
    case ResidualStrategy::custom:
      if (custom_mu_.rows() != n || custom_mu_.cols() != p)
        throw std::invalid_argument("residualizer: custom mu dimension mismatch");
      return custom_mu_.col(j);
  }
  throw std::logic_error("residualizer: bad strategy");
}

Matrix Residualizer::mu_matrix(const Matrix& design) const {
  const Index n = design.rows();
  const Index p = design.cols();
  switch (strategy_) {
    case ResidualStrategy::zero:
      return Matrix::Zero(n, p);
    case ResidualStrategy::gaussian_conditional: {
      if (precision_.rows() != p)
        throw std::invalid_argument("residualizer: precision dimension mismatch");
      Matrix mu = design * precision_;
      for (Index j = 0; j < p; ++j) {
        const double tjj = precision_(j, j);
        if (tjj <= 0.0)
          throw std::runtime_error("residualizer: nonpositive precision diagonal");
        mu.col(j) = design.col(j) - mu.col(j) / tjj;
      }
      return mu;
    }
    case ResidualStrategy::custom:
      if (custom_mu_.rows() != n || custom_mu_.cols() != p)
        throw std::invalid_argument("residualizer: custom mu dimension mismatch");
      return custom_mu_;
    case ResidualStrategy::ols_projection: {
      Matrix mu(n, p);
      for (Index j = 0; j < p; ++j) mu.col(j) = mu_column(design, j);
      return mu;
    }
  }
  throw std::logic_error("residualizer: bad strategy");
}

std::pair<Vector, Vector> residual_columns(const Residualizer& residualizer,
                                           const Matrix& design, Index j) {
  Vector mu = residualizer.mu_column(design, j);
  Vector checked = design.col(j) - mu;
  return {std::move(mu), std::move(checked)};
}

}  // namespace lcu
