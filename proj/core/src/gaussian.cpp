#include "lcu/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lcu {

namespace {

Matrix spd_inverse(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": matrix not positive definite");
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

Matrix lower_factor(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // PSD fallback via eigendecomposition with a small negative tolerance.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
  Vector d = eig.eigenvalues();
  const double tol = 1e-10 * std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Index i = 0; i < d.size(); ++i) {
    if (d[i] < -tol)
      throw std::runtime_error(std::string(what) + ": matrix not PSD");
    d[i] = d[i] > 0.0 ? std::sqrt(d[i]) : 0.0;
  }
  return eig.eigenvectors() * d.asDiagonal();
}

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw std::invalid_argument(std::string(what) + ": matrix must be square");
}

Vector conditional_variances_of(const Matrix& theta) {
  Vector v(theta.rows());
  for (Index j = 0; j < theta.rows(); ++j) {
    if (theta(j, j) <= 0.0)
      throw std::runtime_error("gaussian model: nonpositive precision diagonal");
    v[j] = 1.0 / theta(j, j);
  }
  return v;
}

}  // namespace

GaussianDesignModel GaussianDesignModel::FromCovariance(Matrix sigma) {
  check_square(sigma, "gaussian model");
  GaussianDesignModel m;
  m.theta = spd_inverse(sigma, "gaussian model");
  m.chol_sigma = lower_factor(sigma, "gaussian model");
  m.conditional_variances = conditional_variances_of(m.theta);
  m.sigma = std::move(sigma);
  return m;
}

GaussianDesignModel GaussianDesignModel::FromPrecision(Matrix theta) {
  check_square(theta, "gaussian model");
  GaussianDesignModel m;
  m.sigma = spd_inverse(theta, "gaussian model");
  m.chol_sigma = lower_factor(m.sigma, "gaussian model");
  m.conditional_variances = conditional_variances_of(theta);
  m.theta = std::move(theta);
  return m;
}

double GaussianDesignModel::inverse_residual() const {
  return (sigma * theta - Matrix::Identity(dim(), dim()))
      .lpNorm<Eigen::Infinity>();
}

Matrix ar1_covariance(Index p, double rho) {
  if (std::abs(rho) >= 1.0)
    throw std::invalid_argument("ar1_covariance: |rho| must be < 1");
  Matrix sigma(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      sigma(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
  return sigma;
}

GaussianDesignModel equicorrelated_from_precision(Index p, double a_p, double eps) {
  if (a_p <= 0.0 || eps <= 0.0)
    throw std::invalid_argument("equicorrelated: parameters must be positive");
  const Matrix ones = Matrix::Ones(p, p);
  GaussianDesignModel m;
  m.theta = a_p * (ones + eps * Matrix::Identity(p, p));
  const double dp = static_cast<double>(p);
  m.sigma = (Matrix::Identity(p, p) - (1.0 / eps) / (1.0 + dp / eps) * ones) /
            (a_p * eps);
  m.chol_sigma = lower_factor(m.sigma, "equicorrelated");
  m.conditional_variances = conditional_variances_of(m.theta);
  return m;
}

Matrix sample_design(Index n, const GaussianDesignModel& model, Rng& rng) {
  const Index p = model.dim();
  Matrix a(n, p);
  Vector z(p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) z[j] = rng.normal();
    a.row(i) = (model.chol_sigma * z).transpose();
  }
  return a;
}

Vector conditional_column_sample_mu(const Vector& mu_col, double theta_jj, Rng& rng) {
  const double sd = std::sqrt(1.0 / theta_jj);
  Vector out(mu_col.size());
  for (Index i = 0; i < out.size(); ++i) out[i] = mu_col[i] + sd * rng.normal();
  return out;
}

Vector conditional_column_sample(const Matrix& design, Index j,
                                 const GaussianDesignModel& model, Rng& rng) {
  const double tjj = model.theta(j, j);
  const Vector mu = design.col(j) - design * model.theta.col(j) / tjj;
  return conditional_column_sample_mu(mu, tjj, rng);
}

Vector three_point_column_sample_mu(const Vector& mu_col, double theta_jj,
                                    double xi, Rng& rng) {
  if (xi <= 0.0 || xi > 1.0)
    throw std::invalid_argument("three_point: xi must be in (0, 1]");
  const double sd = std::sqrt(1.0 / theta_jj);
  const double mag = 1.0 / std::sqrt(xi);
  Vector out(mu_col.size());
  for (Index i = 0; i < out.size(); ++i) {
    const double u = rng.uniform();
    double innovation = 0.0;
    if (u < xi / 2.0)
      innovation = mag;
    else if (u < xi)
      innovation = -mag;
    out[i] = mu_col[i] + sd * innovation;
  }
  return out;
}

Vector three_point_column_sample(const Matrix& design, Index j,
                                 const GaussianDesignModel& model, double xi,
                                 Rng& rng) {
  const double tjj = model.theta(j, j);
  const Vector mu = design.col(j) - design * model.theta.col(j) / tjj;
  return three_point_column_sample_mu(mu, tjj, xi, rng);
}

Vector generate_response(const Matrix& design, const Vector& coefficients,
                         double noise_variance, Rng& rng) {
  if (noise_variance <= 0.0)
    throw std::invalid_argument("generate_response: noise variance must be > 0");
  const double sd = std::sqrt(noise_variance);
  Vector y = design * coefficients;
  for (Index i = 0; i < y.size(); ++i) y[i] += sd * rng.normal();
  return y;
}

SparseCoefficients sparse_coefficients(Index p, Index s, CoefSpec spec,
                                       double amplitude, Rng& rng) {
  if (s < 0 || s > p)
    throw std::invalid_argument("sparse_coefficients: s out of range");
  SparseCoefficients out;
  out.values = Vector::Zero(p);
  if (spec == CoefSpec::gaussian_support) {
    for (Index j = 0; j < s; ++j) {
      out.values[j] = rng.normal();
      out.support.push_back(j);
    }
  } else {
    // Partial Fisher-Yates for a uniform s-subset.
    std::vector<Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index t = 0; t < s; ++t) {
      const auto r = static_cast<std::size_t>(
          t + static_cast<Index>(rng.next_u64() %
                                 static_cast<std::uint64_t>(p - t)));
      std::swap(idx[static_cast<std::size_t>(t)], idx[r]);
      out.support.push_back(idx[static_cast<std::size_t>(t)]);
      out.values[idx[static_cast<std::size_t>(t)]] = amplitude;
    }
    std::sort(out.support.begin(), out.support.end());
  }
  return out;
}

double eq_knockoff_s(Index p, double a_p, double eps) {
  if (a_p <= 0.0 || eps <= 0.0)
    throw std::invalid_argument("eq_knockoff_s: parameters must be positive");
  const double dp = static_cast<double>(p);
  if (eps < dp - 1.0) return 2.0 / (a_p * (dp + eps));
  return (1.0 + (dp - 1.0) / eps) / (a_p * (eps + dp));
}

Matrix model_x_knockoff_sample(const Matrix& design,
                               const GaussianDesignModel& model, Rng& rng) {
  if (!model.knockoff_s)
    throw std::invalid_argument("knockoff sample: model has no knockoff s");
  const Index n = design.rows();
  const Index p = design.cols();
  const Vector& s = *model.knockoff_s;
  if (s.size() != p)
    throw std::invalid_argument("knockoff sample: s length mismatch");
  // Conditional law per row: N(a - S Theta a, 2S - S Theta S).
  const Matrix st = s.asDiagonal() * model.theta;
  const Matrix cond_cov =
      2.0 * Matrix(s.asDiagonal()) - st * Matrix(s.asDiagonal());
  const Matrix l = lower_factor(cond_cov, "knockoff sample");
  Matrix z(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
  return design - design * st.transpose() + z * l.transpose();
}

KnockoffPrecisionDiag knockoff_precision_diagnostic(const Matrix& theta,
                                                    const Vector& s,
                                                    double threshold,
                                                    double perturb) {
  check_square(theta, "knockoff diagnostic");
  const Index p = theta.rows();
  if (s.size() != p)
    throw std::invalid_argument("knockoff diagnostic: s length mismatch");
  Matrix th = theta;
  if (perturb > 0.0) th.diagonal().array() += perturb;
  const Matrix schur = 2.0 * Matrix(s.asDiagonal()) -
                       s.asDiagonal() * th * Matrix(s.asDiagonal());
  Eigen::LLT<Matrix> llt(schur);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "knockoff diagnostic: Schur complement not positive definite");
  const Matrix inv = llt.solve(Matrix::Identity(p, p));
  KnockoffPrecisionDiag out;
  out.diagonals = inv.diagonal();
  Index c = 0;
  for (Index j = 0; j < p; ++j)
    if (out.diagonals[j] > threshold) ++c;
  out.fraction_exceeding = static_cast<double>(c) / static_cast<double>(p);
  return out;
}

}  // namespace lcu
