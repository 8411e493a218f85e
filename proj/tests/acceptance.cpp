// Acceptance gate: one test case per criterion, each printing a PASS/FAIL
// line with the measured quantities. Run a single criterion with
//   acceptance -tc='criterion-NN*'
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include "lcu/bench.hpp"
#include "lcu/debias.hpp"
#include "lcu/gaussian.hpp"
#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/residualize.hpp"
#include "lcu/selection.hpp"
#include "lcu/update.hpp"

using namespace lcu;

namespace {

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s: %s (%s)\n", name, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, name << ": " << detail);
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

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

double pearson(const std::vector<std::pair<double, double>>& pairs) {
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double cov = 0.0, vx = 0.0, vy = 0.0;
  for (const auto& [x, y] : pairs) {
    cov += (x - mx) * (y - my);
    vx += (x - mx) * (x - mx);
    vy += (y - my) * (y - my);
  }
  return cov / std::sqrt(vx * vy);
}

const MethodSummary& find_summary(const FdrBenchResult& res,
                                  const std::string& label) {
  for (const MethodSummary& m : res.summaries)
    if (m.label == label) return m;
  throw std::logic_error("missing summary " + label);
}

SimScenario equicorr_scenario(Index n, Index p, Index s) {
  SimScenario sc;
  sc.n = n;
  sc.p = p;
  sc.s = s;
  sc.design = DesignKind::equicorr;
  sc.a_p = 1.0 / static_cast<double>(p);
  sc.eps_eq = 50.0;
  sc.coef = CoefSpec::fixed_amplitude;
  sc.amplitude = 0.5;
  sc.noise_variance = 1.0 / static_cast<double>(p);
  sc.lambda = 0.01;
  sc.q = 0.1;
  sc.crt_repetitions = 200;
  return sc;
}

}  // namespace

TEST_CASE("criterion-01 orthogonal-design t-update exactness") {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(1000 + seed);
    const Index n = 128, p = 64;
    const Matrix a = orthogonal_design(n, p, rng);
    Vector alpha = Vector::Zero(p);
    for (Index j = 0; j < 20; ++j) alpha[j] = 1.5 * rng.normal();
    Vector y = a * alpha;
    for (Index i = 0; i < n; ++i) y[i] += 0.4 * rng.normal();
    const double lambda = 0.2;
    const LassoFit fit = solve_lasso({a, y, lambda});
    const ProjectionFamily family(a, fit.active_set);
    ExactRefitOracle oracle(a, y, lambda);
    const Index j = static_cast<Index>(seed % p);
    const Vector mu = Vector::Zero(n);
    const ColumnUpdater updater(a, fit, lambda, family, mu, j);
    const Vector newcol = random_vector(n, rng);  // arbitrary replacement
    const ExactUpdate exact = oracle.evaluate_with_mu(j, newcol, mu, &fit);
    worst = std::max(worst, std::abs(updater.t_approx(newcol) - exact.t_stat));
  }
  report("criterion-01", worst <= 1e-8,
         "max |approx t - exact t| = " + fmt(worst) + " <= 1e-8 over 20 seeds");
}

TEST_CASE("criterion-02 OLS reduction with the projection residualizer") {
  Rng rng(2002);
  const Index n = 200, p = 50;
  const Matrix a = random_matrix(n, p, rng);
  Vector alpha = Vector::Zero(p);
  for (Index j = 0; j < 10; ++j) alpha[j] = rng.normal();
  Vector y = a * alpha;
  for (Index i = 0; i < n; ++i) y[i] += 0.5 * rng.normal();
  const LassoFit fit = solve_lasso({a, y, 0.1});
  const DebiasResult res =
      debias_generalized(a, y, fit, Residualizer::OlsProjection());
  const Vector ols = (a.transpose() * a).ldlt().solve(a.transpose() * y);
  const double gap = (res.alpha_u - ols).lpNorm<Eigen::Infinity>();
  report("criterion-02", gap <= 1e-8,
         "||alpha_u - OLS||_inf = " + fmt(gap) + " <= 1e-8");
}

TEST_CASE("criterion-03 rank-one projection family vs direct factorization") {
  Rng rng(3003);
  const Index n = 120, p = 150, k = 40;
  const Matrix a = random_matrix(n, p, rng);
  IndexList active;
  for (Index j = 0; j < k; ++j) active.push_back(3 * j);  // |S| = 40
  const ProjectionFamily family(a, active);

  std::vector<Vector> probes;
  for (int t = 0; t < 50; ++t) probes.push_back(random_vector(n, rng));

  double worst = 0.0;
  for (Index j = 0; j < p; ++j) {
    // Direct: project onto col(A_{:S \ {j}}) via a fresh factorization.
    IndexList sub;
    for (Index q : active)
      if (q != j) sub.push_back(q);
    Matrix cols(n, static_cast<Index>(sub.size()));
    for (std::size_t i = 0; i < sub.size(); ++i)
      cols.col(static_cast<Index>(i)) = a.col(sub[i]);
    const Eigen::LDLT<Matrix> gram((cols.transpose() * cols).eval());
    for (const Vector& v : probes) {
      const Vector direct = cols * gram.solve(cols.transpose() * v);
      worst = std::max(
          worst, (family.apply(j, v) - direct).lpNorm<Eigen::Infinity>());
    }
  }
  report("criterion-03", worst <= 1e-10,
         "max |family - direct| = " + fmt(worst) +
             " <= 1e-10 over all j, 50 probes");
}

TEST_CASE("criterion-04 KKT suite across the harness grid") {
  double worst_excess = 0.0, worst_drift = 0.0, worst_sign = 0.0;
  int solved = 0;
  const std::vector<std::pair<Index, Index>> shapes = {
      {100, 150}, {200, 100}, {150, 300}};
  const std::vector<double> lambdas = {0.01, 0.1, 0.5};
  for (int design = 0; design < 3; ++design) {
    for (const auto& [n, p] : shapes) {
      GaussianDesignModel model;
      if (design == 0)
        model = GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.5));
      else if (design == 1)
        model = GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.95));
      else
        model = equicorrelated_from_precision(p, 1.0 / static_cast<double>(p),
                                              50.0);
      for (double lambda : lambdas) {
        Rng rng(4000 + 7 * design + static_cast<std::uint64_t>(n) +
                static_cast<std::uint64_t>(lambda * 1000));
        Rng rng_a = rng.substream("design");
        const Matrix a = sample_design(n, model, rng_a);
        Vector alpha = Vector::Zero(p);
        for (Index j = 0; j < p / 10; ++j) alpha[j] = rng.normal();
        Rng rng_w = rng.substream("noise");
        const Vector y = generate_response(a, alpha, 0.25, rng_w);
        const LassoProblem problem{a, y, lambda};
        const LassoFit fit = solve_lasso(problem);
        const KktDiagnostics d = kkt_report(problem, fit);
        worst_excess = std::max(worst_excess, d.max_psi_excess);
        worst_drift = std::max(worst_drift, d.psi_drift);
        worst_sign = std::max(worst_sign, d.max_sign_violation);
        ++solved;
      }
    }
  }
  const bool pass =
      worst_excess <= 1e-8 && worst_drift <= 1e-12 && worst_sign <= 1e-6;
  report("criterion-04", pass,
         std::to_string(solved) + " fits: max psi excess " + fmt(worst_excess) +
             " <= 1e-8, psi drift " + fmt(worst_drift) +
             " <= 1e-12, sign violation " + fmt(worst_sign) + " <= 1e-6");
}

TEST_CASE("criterion-05 normalized update errors at full scale, rho = 0.95") {
  UpdateErrorOptions opt;
  opt.alpha_scales = {1.0};  // n = 800, p = 1000, s = 400
  opt.rho_values = {0.95};
  opt.reps = 3;  // >= 3 seeds
  opt.lambda = 0.2;
  opt.seed = 1001;
  const UpdateErrorResult res = run_update_error_experiment(opt);
  REQUIRE(res.rows.size() == 2);
  const double lasso_err = res.rows[0].value;
  const double db_err = res.rows[1].value;
  const double ratio = lasso_err / db_err;
  const bool pass = db_err <= 0.02 && ratio >= 20.0;
  report("criterion-05", pass,
         "debiased error " + fmt(db_err) + " <= 0.02, lasso/debiased ratio " +
             fmt(ratio) + " >= 20 (lasso " + fmt(lasso_err) + ", 3 reps)");
}

TEST_CASE("criterion-06 three-point design update errors") {
  UpdateErrorOptions opt;
  opt.alpha_scales = {0.9};
  opt.three_point = true;
  opt.xi_values = {0.5, 0.1};
  opt.reps = 1;
  opt.lambda = 0.2;
  opt.seed = 1006;
  const UpdateErrorResult res = run_update_error_experiment(opt);
  REQUIRE(res.rows.size() == 4);  // two cells x (lasso, debiased)
  bool pass = true;
  std::string detail;
  for (const TableRow& r : res.rows) {
    if (r.metric != "debiased-error") continue;
    pass = pass && r.value <= 0.05;
    if (!detail.empty()) detail += ", ";
    detail += "xi " + fmt(r.param2) + ": " + fmt(r.value);
  }
  report("criterion-06", pass, "debiased errors <= 0.05 (" + detail + ")");
}

TEST_CASE("criterion-07 FDR and power at the sparse equicorrelated setting") {
  const SimScenario sc = equicorr_scenario(200, 300, 20);
  const std::vector<MethodSpec> methods = {
      {"crt-db", Engine::approx}, {"local-knockoff-db", Engine::approx}};
  const FdrBenchResult res = run_fdr_bench(sc, methods, 20, 77);
  const MethodSummary& crt = find_summary(res, "approx-crt-db");
  const MethodSummary& lkf = find_summary(res, "approx-local-knockoff-db");
  const bool pass = crt.fdr <= 0.15 && crt.power >= 0.9 && lkf.fdr <= 0.20 &&
                    lkf.power >= 0.9;
  report("criterion-07", pass,
         "crt-db FDR " + fmt(crt.fdr) + " <= 0.15, power " + fmt(crt.power) +
             " >= 0.9; local-knockoff-db FDR " + fmt(lkf.fdr) +
             " <= 0.20, power " + fmt(lkf.power) + " >= 0.9 (20 reps)");
}

TEST_CASE("criterion-08 power separation in the dense regime") {
  const SimScenario sc = equicorr_scenario(600, 1000, 200);
  const std::vector<MethodSpec> methods = {{"local-knockoff", Engine::approx},
                                           {"knockoff", Engine::approx}};
  const FdrBenchResult res = run_fdr_bench(sc, methods, 10, 88);
  const double lkf_power = find_summary(res, "approx-local-knockoff").power;
  const double ko_power = find_summary(res, "approx-knockoff").power;
  const bool pass = lkf_power >= 5.0 * ko_power && ko_power <= 0.1;
  report("criterion-08", pass,
         "local-knockoff power " + fmt(lkf_power) + " >= 5 x knockoff power " +
             fmt(ko_power) + ", knockoff power <= 0.1 (10 reps)");
}

TEST_CASE("criterion-09 knockoff-precision diagonal growth") {
  const DiagKnockoffResult res = diag_knockoff({50, 200}, 1e-6, 1e-6);
  bool pass = true;
  std::string detail;
  for (const TableRow& r : res.rows) {
    if (r.metric == "identity-fraction") continue;
    pass = pass && r.value >= 3.0 / 5.0;
    if (!detail.empty()) detail += ", ";
    detail += r.metric + " p=" + fmt(r.param1) + ": " + fmt(r.value);
  }
  report("criterion-09", pass, "fractions >= 3/5 (" + detail + ")");
}

TEST_CASE("criterion-10 Gaussian denominator reduction") {
  const Index n = 800, p = 1000, s = 400;
  const GaussianDesignModel model =
      GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.5));
  Rng rng(1010);
  Rng rng_a = rng.substream("design");
  const Matrix a = sample_design(n, model, rng_a);
  Rng rng_c = rng.substream("coef");
  const SparseCoefficients coef =
      sparse_coefficients(p, s, CoefSpec::gaussian_support, 0.0, rng_c);
  Rng rng_w = rng.substream("noise");
  const Vector y = generate_response(a, coef.values,
                                     0.01 * static_cast<double>(n), rng_w);
  const LassoFit fit = solve_lasso({a, y, 0.2});
  const DebiasResult res =
      debias_generalized(a, y, fit, Residualizer::GaussianConditional(model.theta));
  const DenominatorGaps gaps =
      gaussian_denominator_check(res, fit, model.conditional_variances);
  const double frac = gaps.frac_within(0.1);
  report("criterion-10", frac >= 0.9,
         "fraction of coordinates with relative gap <= 0.1: " + fmt(frac) +
             " >= 0.9 (median gap " + fmt(gaps.median) + ", k = " +
             std::to_string(fit.k) + ")");
}

TEST_CASE("criterion-11 approximate vs exact-refit correlation") {
  const Index n = 200, p = 120;
  const GaussianDesignModel model =
      GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.5));
  std::vector<std::pair<double, double>> pairs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(1100 + seed);
    Rng rng_a = rng.substream("design");
    const Matrix a = sample_design(n, model, rng_a);
    Vector alpha = Vector::Zero(p);
    for (Index j = 0; j < 24; ++j) alpha[j] = 0.5 * rng.normal();
    Rng rng_w = rng.substream("noise");
    const Vector y = generate_response(a, alpha, 0.25, rng_w);
    const double lambda = 0.15;
    const LassoFit fit = solve_lasso({a, y, lambda});
    const ProjectionFamily family(a, fit.active_set);
    ExactRefitOracle oracle(a, y, lambda);
    for (Index j = 0; j < 20; ++j) {
      const double tjj = model.theta(j, j);
      const Vector mu = a.col(j) - a * model.theta.col(j) / tjj;
      Rng rng_b = rng.substream("resample", static_cast<std::uint64_t>(j));
      const Vector b = conditional_column_sample_mu(mu, tjj, rng_b);
      const ColumnUpdater updater(a, fit, lambda, family, mu, j);
      const auto approx = updater.debias_approx(b);
      const ExactUpdate exact = oracle.evaluate_with_mu(j, b, mu, &fit);
      if (approx && !exact.degenerate)
        pairs.emplace_back(*approx, exact.debiased);
    }
  }
  REQUIRE(pairs.size() >= 150);
  const double r = pearson(pairs);
  report("criterion-11", r >= 0.99,
         "Pearson correlation " + fmt(r) + " >= 0.99 over " +
             std::to_string(pairs.size()) + " (approx, exact) pairs");
}

TEST_CASE("criterion-12 Lasso-solve complexity accounting") {
  SimScenario sc = equicorr_scenario(60, 40, 4);
  sc.q = 0.2;
  sc.lambda = 0.02;
  sc.amplitude = 0.8;
  sc.crt_repetitions = 5;
  const int reps = 2;
  const FdrBenchResult res = run_fdr_bench(
      sc,
      {{"local-knockoff", Engine::approx},
       {"crt", Engine::approx},
       {"local-knockoff", Engine::exact},
       {"crt", Engine::exact}},
      reps, 12);
  const std::uint64_t a_lkf = res.summaries[0].lasso_solves;
  const std::uint64_t a_crt = res.summaries[1].lasso_solves;
  const std::uint64_t e_lkf = res.summaries[2].lasso_solves;
  const std::uint64_t e_crt = res.summaries[3].lasso_solves;
  const auto u = [](Index v) { return static_cast<std::uint64_t>(v); };
  const bool pass = a_lkf == u(reps) && a_crt == u(reps) &&
                    e_lkf == u(reps) * (1 + u(sc.p)) &&
                    e_crt == u(reps) * (1 + u(sc.p) * 5);
  report("criterion-12", pass,
         "approx solves per rep: local-knockoff " + std::to_string(a_lkf / 2) +
             ", crt " + std::to_string(a_crt / 2) + " (= 1); exact: " +
             std::to_string(e_lkf / 2) + " (= 1+p), " +
             std::to_string(e_crt / 2) + " (= 1+pK)");
}
