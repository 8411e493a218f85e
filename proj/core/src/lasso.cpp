#include "lcu/lasso.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "lcu/rng.hpp"

namespace lcu {

namespace {

std::atomic<std::uint64_t> g_solve_count{0};

bool all_finite(const Matrix& m) { return m.allFinite(); }

// Cyclic coordinate descent on the Gram form of the objective.
// g maintains (1/n) A^T (Y - A a) = c - G a.
struct CdState {
  Vector alpha;
  Vector grad;
  int sweeps = 0;
};

double cd_pass(const Matrix& gram, double lambda, CdState& st,
               const std::vector<Index>* subset) {
  const Index p = st.alpha.size();
  double max_delta = 0.0;
  const Index count = subset ? static_cast<Index>(subset->size()) : p;
  for (Index t = 0; t < count; ++t) {
    const Index j = subset ? (*subset)[t] : t;
    const double gjj = gram(j, j);
    if (gjj <= 0.0) continue;  // all-zero column, coefficient stays put
    const double old = st.alpha[j];
    const double z = st.grad[j] + gjj * old;
    const double updated = soft_threshold(z, lambda) / gjj;
    const double delta = updated - old;
    if (delta != 0.0) {
      st.alpha[j] = updated;
      st.grad.noalias() -= gram.col(j) * delta;
      max_delta = std::max(max_delta, std::abs(delta));
    }
  }
  return max_delta;
}

void refresh_gradient(const Matrix& gram, const Vector& corr, CdState& st) {
  st.grad = corr;
  for (Index j = 0; j < st.alpha.size(); ++j) {
    if (st.alpha[j] != 0.0) st.grad.noalias() -= gram.col(j) * st.alpha[j];
  }
}

// KKT violation measured in subgradient units: psi = grad / lambda.
double kkt_gap_from_gradient(const Vector& grad, const Vector& alpha, double lambda) {
  double gap = 0.0;
  for (Index j = 0; j < alpha.size(); ++j) {
    const double psi = grad[j] / lambda;
    double v;
    if (alpha[j] > 0.0)
      v = std::abs(psi - 1.0);
    else if (alpha[j] < 0.0)
      v = std::abs(psi + 1.0);
    else
      v = std::max(std::abs(psi) - 1.0, 0.0);
    gap = std::max(gap, v);
  }
  return gap;
}

Vector cd_solve(const Matrix& gram, const Vector& corr, double lambda,
                const SolverOptions& options, double* out_gap, int* out_sweeps) {
  const Index p = corr.size();
  CdState st;
  st.alpha = options.warm_start ? *options.warm_start : Vector::Zero(p);
  refresh_gradient(gram, corr, st);

  double gap = kkt_gap_from_gradient(st.grad, st.alpha, lambda);
  while (gap > options.kkt_tol && st.sweeps < options.max_sweeps) {
    cd_pass(gram, lambda, st, nullptr);
    ++st.sweeps;
    // Inner loop restricted to the current support.
    std::vector<Index> support;
    for (Index j = 0; j < p; ++j)
      if (st.alpha[j] != 0.0) support.push_back(j);
    for (int inner = 0; inner < 100 && st.sweeps < options.max_sweeps; ++inner) {
      const double d = cd_pass(gram, lambda, st, &support);
      ++st.sweeps;
      if (d <= 1e-4 * lambda * options.kkt_tol) break;
    }
    refresh_gradient(gram, corr, st);
    gap = kkt_gap_from_gradient(st.grad, st.alpha, lambda);
  }
  if (out_gap) *out_gap = gap;
  if (out_sweeps) *out_sweeps = st.sweeps;
  return st.alpha;
}

LassoFit finalize_fit(const Matrix& design, const Vector& response, double lambda,
                      const Vector& alpha, double sign_tol, int sweeps) {
  const Index n = design.rows();
  const Index p = design.cols();
  LassoFit fit;
  fit.coefficients = alpha;
  fit.residual = response - design * alpha;
  fit.iterations = sweeps;
  fit.signs.assign(static_cast<std::size_t>(p), 0);
  if (lambda > 0.0) {
    fit.subgradient = design.transpose() * fit.residual / (static_cast<double>(n) * lambda);
    for (Index j = 0; j < p; ++j) {
      if (fit.subgradient[j] >= 1.0 - sign_tol)
        fit.signs[static_cast<std::size_t>(j)] = 1;
      else if (fit.subgradient[j] <= -1.0 + sign_tol)
        fit.signs[static_cast<std::size_t>(j)] = -1;
    }
  } else {
    fit.subgradient = Vector::Zero(p);
    for (Index j = 0; j < p; ++j) {
      if (alpha[j] > 0.0) fit.signs[static_cast<std::size_t>(j)] = 1;
      if (alpha[j] < 0.0) fit.signs[static_cast<std::size_t>(j)] = -1;
    }
  }
  for (Index j = 0; j < p; ++j)
    if (fit.signs[static_cast<std::size_t>(j)] != 0) fit.active_set.push_back(j);
  fit.k = static_cast<Index>(fit.active_set.size());
  fit.objective = fit.residual.squaredNorm() / (2.0 * static_cast<double>(n)) +
                  lambda * alpha.lpNorm<1>();
  if (lambda > 0.0) {
    double gap = 0.0;
    for (Index j = 0; j < p; ++j) {
      const double psi = fit.subgradient[j];
      double v;
      if (alpha[j] > 0.0)
        v = std::abs(psi - 1.0);
      else if (alpha[j] < 0.0)
        v = std::abs(psi + 1.0);
      else
        v = std::max(std::abs(psi) - 1.0, 0.0);
      gap = std::max(gap, v);
    }
    fit.kkt_gap = gap;
  }
  return fit;
}

Vector ols_solve(const Matrix& design, const Vector& response) {
  const Matrix gram = design.transpose() * design;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::invalid_argument("lasso: lambda = 0 requires invertible A^T A");
  return ldlt.solve(design.transpose() * response);
}

}  // namespace

double soft_threshold(double x, double t) {
  if (t < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

void LassoProblem::validate() const {
  if (design.rows() < 1 || design.cols() < 1)
    throw std::invalid_argument("lasso: empty design");
  if (response.size() != design.rows())
    throw std::invalid_argument("lasso: response length mismatch");
  if (!(lambda_reg >= 0.0))
    throw std::invalid_argument("lasso: lambda must be nonnegative");
  if (!all_finite(design) || !response.allFinite())
    throw std::invalid_argument("lasso: non-finite input");
  if (lambda_reg == 0.0 && design.rows() <= design.cols())
    throw std::invalid_argument("lasso: lambda = 0 requires n > p");
}

LassoFit solve_lasso(const LassoProblem& problem, const SolverOptions& options) {
  problem.validate();
  g_solve_count.fetch_add(1, std::memory_order_relaxed);
  const Index n = problem.design.rows();
  if (problem.lambda_reg == 0.0) {
    const Vector alpha = ols_solve(problem.design, problem.response);
    return finalize_fit(problem.design, problem.response, 0.0, alpha,
                        options.sign_tol, 0);
  }
  const double dn = static_cast<double>(n);
  const Matrix gram = problem.design.transpose() * problem.design / dn;
  const Vector corr = problem.design.transpose() * problem.response / dn;
  double gap = 0.0;
  int sweeps = 0;
  const Vector alpha = cd_solve(gram, corr, problem.lambda_reg, options, &gap, &sweeps);
  LassoFit fit = finalize_fit(problem.design, problem.response, problem.lambda_reg,
                              alpha, options.sign_tol, sweeps);
  if (gap > options.kkt_tol)
    throw SolverError("lasso: no convergence within max sweeps (kkt gap " +
                          std::to_string(gap) + ")",
                      std::move(fit));
  return fit;
}

LassoWorkspace::LassoWorkspace(const Matrix& design, const Vector& response,
                               double lambda)
    : design_(design), response_(response), lambda_(lambda) {
  LassoProblem{design_, response_, lambda_}.validate();
  const double dn = static_cast<double>(design_.rows());
  gram_ = design_.transpose() * design_ / dn;
  corr_ = design_.transpose() * response_ / dn;
  yty_ = response_.squaredNorm() / dn;
}

void LassoWorkspace::set_column(Index j, const Vector& col) {
  if (j < 0 || j >= design_.cols())
    throw std::invalid_argument("workspace: column index out of range");
  if (col.size() != design_.rows())
    throw std::invalid_argument("workspace: column length mismatch");
  design_.col(j) = col;
  const double dn = static_cast<double>(design_.rows());
  const Vector row = design_.transpose() * col / dn;
  gram_.col(j) = row;
  gram_.row(j) = row.transpose();
  corr_[j] = col.dot(response_) / dn;
}

LassoFit LassoWorkspace::solve(const SolverOptions& options) const {
  g_solve_count.fetch_add(1, std::memory_order_relaxed);
  if (lambda_ == 0.0) {
    const Vector alpha = ols_solve(design_, response_);
    return finalize_fit(design_, response_, 0.0, alpha, options.sign_tol, 0);
  }
  double gap = 0.0;
  int sweeps = 0;
  const Vector alpha = cd_solve(gram_, corr_, lambda_, options, &gap, &sweeps);
  LassoFit fit = finalize_fit(design_, response_, lambda_, alpha, options.sign_tol,
                              sweeps);
  if (gap > options.kkt_tol)
    throw SolverError("lasso: no convergence within max sweeps (kkt gap " +
                          std::to_string(gap) + ")",
                      std::move(fit));
  return fit;
}

KktDiagnostics kkt_report(const LassoProblem& problem, const LassoFit& fit) {
  if (problem.design.cols() != fit.coefficients.size() ||
      problem.design.rows() != fit.residual.size())
    throw std::invalid_argument("kkt_report: dimension mismatch");
  KktDiagnostics d;
  const double dn = static_cast<double>(problem.design.rows());
  Vector psi;
  if (problem.lambda_reg > 0.0)
    psi = problem.design.transpose() * fit.residual / (dn * problem.lambda_reg);
  else
    psi = Vector::Zero(problem.design.cols());
  d.psi_drift = (psi - fit.subgradient).lpNorm<Eigen::Infinity>();
  d.max_psi_excess = std::max(psi.lpNorm<Eigen::Infinity>() - 1.0, 0.0);
  for (Index j = 0; j < fit.coefficients.size(); ++j) {
    const double a = fit.coefficients[j];
    if (a != 0.0) {
      const double s = a > 0.0 ? 1.0 : -1.0;
      d.max_sign_violation = std::max(d.max_sign_violation, std::abs(psi[j] - s));
    }
  }
  if (problem.lambda_reg == 0.0) d.max_sign_violation = 0.0;
  return d;
}

CvResult cross_validate_lambda(const Matrix& design, const Vector& response,
                               const std::vector<double>& lambda_grid, int folds,
                               std::uint64_t seed) {
  if (lambda_grid.empty())
    throw std::invalid_argument("cv: empty lambda grid");
  for (std::size_t i = 1; i < lambda_grid.size(); ++i)
    if (lambda_grid[i] > lambda_grid[i - 1])
      throw std::invalid_argument("cv: lambda grid must be sorted descending");
  if (folds < 2) throw std::invalid_argument("cv: folds must be >= 2");
  const Index n = design.rows();
  if (n < folds) throw std::invalid_argument("cv: fewer samples than folds");

  // Deterministic fold assignment by seeded permutation.
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng = Rng(seed).substream("cv-folds");
  for (std::size_t i = perm.size(); i > 1; --i) {
    const std::size_t r = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(perm[i - 1], perm[r]);
  }
  std::vector<int> fold_of(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < perm.size(); ++t)
    fold_of[static_cast<std::size_t>(perm[t])] = static_cast<int>(t) % folds;

  CvResult out;
  out.lambda_grid = lambda_grid;
  out.cv_errors.assign(lambda_grid.size(), 0.0);

  for (int f = 0; f < folds; ++f) {
    IndexList train, test;
    for (Index i = 0; i < n; ++i)
      (fold_of[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
    Matrix a_train(static_cast<Index>(train.size()), design.cols());
    Vector y_train(static_cast<Index>(train.size()));
    for (std::size_t r = 0; r < train.size(); ++r) {
      a_train.row(static_cast<Index>(r)) = design.row(train[r]);
      y_train[static_cast<Index>(r)] = response[train[r]];
    }
    SolverOptions options;
    std::optional<Vector> warm;
    for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
      options.warm_start = warm;
      const LassoFit fit =
          solve_lasso({a_train, y_train, lambda_grid[g]}, options);
      warm = fit.coefficients;
      double sse = 0.0;
      for (Index i : test) {
        const double pred = design.row(i).dot(fit.coefficients);
        sse += (response[i] - pred) * (response[i] - pred);
      }
      out.cv_errors[g] += sse / static_cast<double>(test.size()) /
                          static_cast<double>(folds);
    }
  }

  std::size_t best = 0;
  for (std::size_t g = 1; g < lambda_grid.size(); ++g)
    if (out.cv_errors[g] < out.cv_errors[best]) best = g;  // ties keep larger lambda
  out.best_lambda = lambda_grid[best];
  return out;
}

std::uint64_t lasso_solve_count() {
  return g_solve_count.load(std::memory_order_relaxed);
}

void reset_lasso_solve_count() {
  g_solve_count.store(0, std::memory_order_relaxed);
}

}  // namespace lcu
