#include "doctest.h"

#include <cmath>

#include "lcu/gaussian.hpp"
#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/update.hpp"

using namespace lcu;

namespace {

Matrix random_matrix(Index n, Index p, Rng& rng) {
  Matrix m(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) m(i, j) = rng.normal();
  return m;
}

Vector random_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Matrix orthogonal_design(Index n, Index p, Rng& rng) {
  const Matrix g = random_matrix(n, p, rng);
  const Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = Matrix(qr.householderQ()).leftCols(p);
  return std::sqrt(static_cast<double>(n)) * q;
}

}  // namespace

TEST_CASE("orthogonal designs make the t update exact") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 7);
    const Index n = 48, p = 24;
    const Matrix a = orthogonal_design(n, p, rng);
    Vector alpha = Vector::Zero(p);
    for (Index j = 0; j < 8; ++j) alpha[j] = 2.0 * rng.normal();
    Vector y = a * alpha;
    for (Index i = 0; i < n; ++i) y[i] += 0.3 * rng.normal();
    const double lambda = 0.25;
    const LassoFit fit = solve_lasso({a, y, lambda});
    const ProjectionFamily family(a, fit.active_set);
    ExactRefitOracle oracle(a, y, lambda);
    const Index j = 3;
    const Vector mu = Vector::Zero(n);
    const ColumnUpdater updater(a, fit, lambda, family, mu, j);
    const Vector newcol = random_vector(n, rng);
    const double approx_t = updater.t_approx(newcol);
    const ExactUpdate exact = oracle.evaluate_with_mu(j, newcol, mu, &fit);
    CHECK(std::abs(approx_t - exact.t_stat) < 1e-8);
  }
}

TEST_CASE("null problems keep every update at zero") {
  Rng rng(402);
  const Index n = 30, p = 10;
  const Matrix a = random_matrix(n, p, rng);
  const Vector y = random_vector(n, rng);
  const double lambda =
      5.0 * (a.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(n);
  const LassoFit fit = solve_lasso({a, y, lambda});
  REQUIRE(fit.k == 0);
  const ProjectionFamily family(a, fit.active_set);
  const ColumnUpdater updater(a, fit, lambda, family, Vector::Zero(n), 4);
  // A modest replacement column cannot activate the coordinate either.
  const Vector newcol = 0.5 * random_vector(n, rng);
  const auto lasso_update = updater.lasso_approx(newcol);
  REQUIRE(lasso_update.has_value());
  CHECK(*lasso_update == 0.0);
}

TEST_CASE("approximate updates track the exact refit oracle") {
  Rng rng(403);
  const Index n = 120, p = 60;
  const GaussianDesignModel model =
      GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.5));
  Rng rng_a = rng.substream("design");
  const Matrix a = sample_design(n, model, rng_a);
  Vector alpha = Vector::Zero(p);
  for (Index j = 0; j < 15; ++j) alpha[j] = rng.normal();
  Rng rng_w = rng.substream("noise");
  const Vector y = generate_response(a, alpha, 0.5, rng_w);
  const double lambda = 0.15;
  const LassoFit fit = solve_lasso({a, y, lambda});
  const ProjectionFamily family(a, fit.active_set);
  ExactRefitOracle oracle(a, y, lambda);

  double cov = 0.0, va = 0.0, ve = 0.0, ma = 0.0, me = 0.0;
  std::vector<std::pair<double, double>> pairs;
  int used = 0;
  for (Index j = 0; j < 20; ++j) {
    const double tjj = model.theta(j, j);
    const Vector mu = a.col(j) - a * model.theta.col(j) / tjj;
    Rng rng_b = rng.substream("resample", static_cast<std::uint64_t>(j));
    const Vector b = conditional_column_sample_mu(mu, tjj, rng_b);
    const ColumnUpdater updater(a, fit, lambda, family, mu, j);
    const auto approx = updater.debias_approx(b);
    const ExactUpdate exact = oracle.evaluate_with_mu(j, b, mu, &fit);
    if (!approx || exact.degenerate) continue;
    pairs.emplace_back(*approx, exact.debiased);
    ma += *approx;
    me += exact.debiased;
    ++used;
  }
  REQUIRE(used >= 15);
  ma /= used;
  me /= used;
  for (const auto& [x, e] : pairs) {
    cov += (x - ma) * (e - me);
    va += (x - ma) * (x - ma);
    ve += (e - me) * (e - me);
  }
  const double pearson = cov / std::sqrt(va * ve);
  CHECK(pearson > 0.99);
  CHECK(normalized_update_error(pairs) < 0.05);
}

TEST_CASE("dropped mode omits the replaced-column feedback term") {
  Rng rng(404);
  const Index n = 40, p = 16;
  const Matrix a = random_matrix(n, p, rng);
  const Vector y = random_vector(n, rng);
  const double lambda = 0.1;
  const LassoFit fit = solve_lasso({a, y, lambda});
  const ProjectionFamily family(a, fit.active_set);
  REQUIRE(fit.k > 0);
  const Index j = fit.active_set.front();  // alpha_j != 0 matters here
  const Vector mu = Vector::Zero(n);
  const ColumnUpdater updater(a, fit, lambda, family, mu, j);
  const Vector b = random_vector(n, rng);
  const double full = updater.t_approx(b, UpdateMode::full);
  const double dropped = updater.t_approx(b, UpdateMode::dropped);
  const Vector u = family.residual_column(j);
  const double feedback = b.dot(u) * fit.coefficients[j] / static_cast<double>(n);
  CHECK(full - dropped == doctest::Approx(feedback).epsilon(1e-12));
}

TEST_CASE("exact oracle restores the design after evaluation") {
  Rng rng(405);
  const Index n = 25, p = 8;
  const Matrix a = random_matrix(n, p, rng);
  const Vector y = random_vector(n, rng);
  ExactRefitOracle oracle(a, y, 0.1);
  const Vector b = random_vector(n, rng);
  const ExactUpdate first = oracle.evaluate(2, b, Residualizer::Zero());
  const ExactUpdate second = oracle.evaluate(2, b, Residualizer::Zero());
  CHECK(first.lasso == second.lasso);
  CHECK(first.debiased == second.debiased);
  CHECK(first.t_stat == second.t_stat);
}

TEST_CASE("sign change counting") {
  LassoFit a, b;
  a.signs = {1, 0, -1, 0, 1};
  b.signs = {1, 1, -1, 0, -1};
  const SignChanges ch = sign_change_count(a, b);
  CHECK(ch.count == 2);
  REQUIRE(ch.indices.size() == 2);
  CHECK(ch.indices[0] == 1);
  CHECK(ch.indices[1] == 4);
  b.signs.pop_back();
  CHECK_THROWS_AS(sign_change_count(a, b), std::invalid_argument);
}

TEST_CASE("normalized error rejects empty or all-zero baselines") {
  CHECK_THROWS_AS(normalized_update_error({}), std::invalid_argument);
  CHECK_THROWS_AS(normalized_update_error({{1.0, 0.0}, {2.0, 0.0}}),
                  std::invalid_argument);
  CHECK(normalized_update_error({{1.1, 1.0}, {2.0, 2.0}}) ==
        doctest::Approx(0.01 / 5.0));
}
