#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "lcu/bench.hpp"
#include "lcu/lasso.hpp"

using namespace lcu;

namespace {

SimScenario small_scenario() {
  SimScenario s;
  s.n = 60;
  s.p = 40;
  s.s = 4;
  s.design = DesignKind::equicorr;
  s.a_p = 1.0 / 40.0;
  s.eps_eq = 50.0;
  s.coef = CoefSpec::fixed_amplitude;
  s.amplitude = 0.8;
  s.noise_variance = 1.0 / 40.0;
  s.lambda = 0.02;
  s.q = 0.2;
  s.crt_repetitions = 20;
  return s;
}

// Wall-clock rows differ between runs; drop them before comparing.
std::string stable_table(const std::vector<TableRow>& rows) {
  std::vector<TableRow> kept;
  for (const TableRow& r : rows)
    if (r.metric.find("seconds-per-rep") == std::string::npos) kept.push_back(r);
  return serialize_table(kept);
}

}  // namespace

TEST_CASE("scenario validation") {
  SimScenario s = small_scenario();
  CHECK(s.aspect() == doctest::Approx(1.5));
  s.q = 1.5;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_scenario();
  s.s = 100;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = small_scenario();
  s.design = DesignKind::ar1;
  s.rho_ar = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("build_model produces a consistent equicorrelated model") {
  const SimScenario s = small_scenario();
  const GaussianDesignModel m = build_model(s);
  CHECK(m.dim() == 40);
  CHECK(m.inverse_residual() < 1e-8);
  REQUIRE(m.knockoff_s.has_value());
  CHECK((*m.knockoff_s)[0] ==
        doctest::Approx(eq_knockoff_s(40, 1.0 / 40.0, 50.0)));
}

TEST_CASE("update-error experiment is deterministic and well-formed") {
  UpdateErrorOptions opt;
  opt.alpha_scales = {0.1};
  opt.rho_values = {0.5};
  opt.reps = 1;
  opt.lambda = 0.2;
  opt.seed = 42;
  const UpdateErrorResult a = run_update_error_experiment(opt);
  const UpdateErrorResult b = run_update_error_experiment(opt);
  CHECK(serialize_table(a.rows) == serialize_table(b.rows));
  CHECK(serialize_percoord(a.percoord) == serialize_percoord(b.percoord));
  REQUIRE(a.rows.size() == 2);
  CHECK(a.rows[0].metric == "lasso-error");
  CHECK(a.rows[1].metric == "debiased-error");
  CHECK(a.rows[0].value >= 0.0);
  CHECK(std::isfinite(a.rows[0].value));
  CHECK_FALSE(a.percoord.empty());
  CHECK_THROWS_AS(run_update_error_experiment(UpdateErrorOptions{}),
                  std::invalid_argument);
}

TEST_CASE("fdr bench is deterministic and accounts solves per method") {
  const SimScenario s = small_scenario();
  const std::vector<MethodSpec> methods = {
      {"local-knockoff", Engine::approx},
      {"crt", Engine::approx},
      {"knockoff", Engine::approx},
  };
  const int reps = 3;
  const FdrBenchResult a = run_fdr_bench(s, methods, reps, 9);
  const FdrBenchResult b = run_fdr_bench(s, methods, reps, 9);
  CHECK(stable_table(a.rows) == stable_table(b.rows));
  REQUIRE(a.summaries.size() == 3);
  CHECK(a.summaries[0].label == "approx-local-knockoff");
  // Approx engines: exactly one solve per rep; knockoff adds its own solve.
  CHECK(a.summaries[0].lasso_solves == static_cast<std::uint64_t>(reps));
  CHECK(a.summaries[1].lasso_solves == static_cast<std::uint64_t>(reps));
  CHECK(a.summaries[2].lasso_solves == static_cast<std::uint64_t>(reps));
  for (const MethodSummary& m : a.summaries) {
    CHECK(m.fdr >= 0.0);
    CHECK(m.fdr <= 1.0);
    CHECK(m.power >= 0.0);
    CHECK(m.power <= 1.0);
  }
  CHECK_THROWS_AS(run_fdr_bench(s, {{"bogus", Engine::approx}}, 2, 1),
                  std::invalid_argument);
}

TEST_CASE("exact engines consume p (or pK) solves per replicate") {
  SimScenario s = small_scenario();
  s.crt_repetitions = 3;
  const FdrBenchResult res = run_fdr_bench(
      s, {{"local-knockoff", Engine::exact}, {"crt", Engine::exact}}, 1, 4);
  CHECK(res.summaries[0].lasso_solves == static_cast<std::uint64_t>(1 + s.p));
  CHECK(res.summaries[1].lasso_solves ==
        static_cast<std::uint64_t>(1 + s.p * s.crt_repetitions));
}

TEST_CASE("knockoff-precision diagnostics meet the stated bounds") {
  const DiagKnockoffResult res = diag_knockoff({50}, 1e-6, 1e-6);
  REQUIRE(res.rows.size() == 3);
  CHECK(res.rows[0].metric == "singular-eq-fraction");
  CHECK(res.rows[0].value >= 0.6);
  CHECK(res.rows[1].metric == "scaled-eq-fraction");
  CHECK(res.rows[1].value >= 0.6);
  CHECK(res.rows[2].metric == "identity-fraction");
  CHECK(res.rows[2].value == 0.0);
}

TEST_CASE("correlation pruning follows the greedy rule") {
  Rng rng(901);
  const Index n = 50;
  Matrix m(n, 3);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < 3; ++j) m(i, j) = rng.normal();
  // Identical duplicated column: exactly one of the pair is dropped.
  Matrix dup = m;
  dup.col(2) = dup.col(0);
  const IndexList kept = prune_correlated(dup, 0.9);
  CHECK(kept.size() == 2);
  CHECK((kept == IndexList{0, 1} || kept == IndexList{1, 2}));

  // Independent columns: all kept.
  CHECK(prune_correlated(m, 0.5).size() == 3);

  // corr(0,1) high, column 2 independent: one of {0,1} dropped, 2 kept.
  Matrix mixed = m;
  mixed.col(1) = 0.95 * mixed.col(0) + 0.05 * mixed.col(1);
  const IndexList kept2 = prune_correlated(mixed, 0.5);
  CHECK(kept2.size() == 2);
  CHECK(std::find(kept2.begin(), kept2.end(), 2) != kept2.end());
  CHECK_THROWS_AS(prune_correlated(m, 1.5), std::invalid_argument);
}

TEST_CASE("semi-real pipeline closes the loop on synthetic AR(1) data") {
  // Build a synthetic dataset whose true covariance is AR(1), run the
  // pipeline, and check FDR control against the pipeline's own truth.
  const Index n = 150, p = 25;
  const GaussianDesignModel model =
      GaussianDesignModel::FromCovariance(ar1_covariance(p, 0.4));
  Rng rng(902);
  Rng rng_a = rng.substream("design");
  const Matrix a = sample_design(n, model, rng_a);
  Vector alpha = Vector::Zero(p);
  alpha[2] = 1.2;
  alpha[9] = -1.0;
  alpha[17] = 1.5;
  Rng rng_w = rng.substream("noise");
  const Vector y = generate_response(a, alpha, 0.2, rng_w);

  SemiRealOptions opt;
  opt.q = 0.2;
  opt.methods = {{"crt-db", Engine::approx}};
  opt.reps = 20;
  opt.seed = 11;
  // K large enough that a single coordinate can clear the step-up threshold:
  // the smallest attainable p-value 1/(K+1) must be below q/p.
  opt.crt_repetitions = 199;
  // Pin the regularization so the recovered truth holds only coordinates the
  // resampled replicates can realistically re-detect.
  opt.lambda_grid = {0.15};
  const SemiRealResult res = semi_real_pipeline(a, y, opt);
  REQUIRE_FALSE(res.truth.empty());
  REQUIRE(res.summaries.size() == 1);
  CHECK(res.summaries[0].fdr <= 0.2);
  CHECK(res.summaries[0].power > 0.5);
  CHECK(res.noise_estimate > 0.0);
}

TEST_CASE("noise estimate on a pure-noise response tracks the variance") {
  const Index n = 400, p = 10;
  Rng rng(903);
  Matrix a(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  Vector y(n);
  for (Index i = 0; i < n; ++i) y[i] = 1.7 * rng.normal();
  const double sample_var =
      (y.array() - y.mean()).square().sum() / static_cast<double>(n);

  SemiRealOptions opt;
  opt.q = 0.2;
  opt.methods = {{"local-knockoff", Engine::approx}};
  opt.reps = 1;
  opt.seed = 5;
  const SemiRealResult res = semi_real_pipeline(a, y, opt);
  CHECK(res.noise_estimate ==
        doctest::Approx(sample_var).epsilon(0.15));
}

TEST_CASE("content digest matches the FNV-1a reference vectors") {
  CHECK(content_digest("") == "cbf29ce484222325");
  CHECK(content_digest("a") == "af63dc4c8601ec8c");
  CHECK(content_digest("foobar") == "85944171f73967e8");
}

TEST_CASE("manifest serializes to parseable json") {
  RunManifest m;
  m.subcommand = "update-error";
  m.master_seed = 7;
  m.config_snapshot.set("scenario.n", "200");
  m.stage_seconds["run"] = 1.25;
  m.output_digests["table.csv"] = content_digest("x");
  const nlohmann::json j = nlohmann::json::parse(m.to_json());
  CHECK(j["subcommand"] == "update-error");
  CHECK(j["master_seed"] == 7);
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["config"]["scenario.n"] == "200");
  CHECK(j["stage_seconds"]["run"] == 1.25);
  CHECK(j["output_digests"]["table.csv"] == content_digest("x"));
}
