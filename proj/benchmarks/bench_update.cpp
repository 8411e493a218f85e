// Microbenchmarks: approximate one-column update vs exact refit, and the
// rank-one projection family vs a fresh factorization per coordinate.

#include <benchmark/benchmark.h>

#include "lcu/gaussian.hpp"
#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/residualize.hpp"
#include "lcu/rng.hpp"
#include "lcu/update.hpp"

namespace {

using namespace lcu;

struct Fixture {
  Matrix A;
  Vector Y;
  GaussianDesignModel model;
  LassoFit fit;
  double lambda = 0.1;

  explicit Fixture(Index n, Index p, double rho) {
    model = GaussianDesignModel::FromCovariance(ar1_covariance(p, rho));
    Rng rng(42);
    Rng rng_a = rng.substream("design");
    A = sample_design(n, model, rng_a);
    Vector alpha = Vector::Zero(p);
    Rng rng_c = rng.substream("coef");
    for (Index j = 0; j < p / 4; ++j) alpha[j] = rng_c.normal();
    Rng rng_w = rng.substream("noise");
    Y = generate_response(A, alpha, 1.0, rng_w);
    fit = solve_lasso({A, Y, lambda});
  }
};

void BM_ApproxUpdate(benchmark::State& state) {
  static Fixture fx(200, 300, 0.5);
  const ProjectionFamily family(fx.A, fx.fit.active_set);
  const Index j = 7;
  const double tjj = fx.model.theta(j, j);
  const Vector mu = fx.A.col(j) - fx.A * fx.model.theta.col(j) / tjj;
  const ColumnUpdater updater(fx.A, fx.fit, fx.lambda, family, mu, j);
  Rng rng(7);
  for (auto _ : state) {
    Rng sub = rng.substream("resample", 0, static_cast<std::uint64_t>(state.iterations()));
    const Vector B = conditional_column_sample_mu(mu, tjj, sub);
    benchmark::DoNotOptimize(updater.debias_approx(B));
  }
}
BENCHMARK(BM_ApproxUpdate);

void BM_ExactRefit(benchmark::State& state) {
  static Fixture fx(200, 300, 0.5);
  ExactRefitOracle oracle(fx.A, fx.Y, fx.lambda);
  const Index j = 7;
  const double tjj = fx.model.theta(j, j);
  const Vector mu = fx.A.col(j) - fx.A * fx.model.theta.col(j) / tjj;
  Rng rng(7);
  for (auto _ : state) {
    Rng sub = rng.substream("resample", 0, static_cast<std::uint64_t>(state.iterations()));
    const Vector B = conditional_column_sample_mu(mu, tjj, sub);
    benchmark::DoNotOptimize(oracle.evaluate_with_mu(j, B, mu, &fx.fit));
  }
}
BENCHMARK(BM_ExactRefit);

void BM_ProjectionFamilyAll(benchmark::State& state) {
  static Fixture fx(200, 300, 0.5);
  for (auto _ : state) {
    const ProjectionFamily family(fx.A, fx.fit.active_set);
    Vector acc = Vector::Zero(fx.A.rows());
    for (Index j : fx.fit.active_set) acc += family.residual_column(j);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_ProjectionFamilyAll);

void BM_DirectFactorizationAll(benchmark::State& state) {
  static Fixture fx(200, 300, 0.5);
  for (auto _ : state) {
    Vector acc = Vector::Zero(fx.A.rows());
    for (Index j : fx.fit.active_set) {
      IndexList rest;
      for (Index l : fx.fit.active_set)
        if (l != j) rest.push_back(l);
      const ProjectionFamily single(fx.A, rest);
      acc += single.complement_apply(j, fx.A.col(j));
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_DirectFactorizationAll);

}  // namespace

BENCHMARK_MAIN();
