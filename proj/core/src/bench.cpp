#include "lcu/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "lcu/debias.hpp"
#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/residualize.hpp"
#include "lcu/update.hpp"

#include "json.hpp"

namespace lcu {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

// Uniform s-subset of {0,...,p-1} via partial Fisher-Yates, sorted.
IndexList sample_subset(Index p, Index s, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(p));
  for (Index i = 0; i < p; ++i) idx[static_cast<std::size_t>(i)] = i;
  IndexList out;
  for (Index t = 0; t < s; ++t) {
    const auto r = static_cast<std::size_t>(
        t + static_cast<Index>(rng.next_u64() %
                               static_cast<std::uint64_t>(p - t)));
    std::swap(idx[static_cast<std::size_t>(t)], idx[r]);
    out.push_back(idx[static_cast<std::size_t>(t)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Largest knockoff diagonal valid for a general covariance:
// s = min(2 lambda_min(Sigma), min_j Sigma_jj), slightly shrunk for safety.
Vector generic_knockoff_s(const GaussianDesignModel& model) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(model.sigma);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("knockoff s: eigendecomposition failed");
  const double lmin = eig.eigenvalues().minCoeff();
  const double dmin = model.sigma.diagonal().minCoeff();
  const double s = 0.999 * std::min(2.0 * lmin, dmin);
  if (s <= 0.0)
    throw std::runtime_error("knockoff s: covariance not positive definite");
  return Vector::Constant(model.dim(), s);
}

}  // namespace

void SimScenario::validate() const {
  if (n < 1 || p < 1) throw std::invalid_argument("scenario: n, p must be >= 1");
  if (s < 0 || s > p) throw std::invalid_argument("scenario: s out of range");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("scenario: q must be in (0, 1)");
  if (lambda < 0.0) throw std::invalid_argument("scenario: lambda must be >= 0");
  if (noise_variance <= 0.0)
    throw std::invalid_argument("scenario: noise variance must be > 0");
  if (crt_repetitions < 1)
    throw std::invalid_argument("scenario: crt repetitions must be >= 1");
  if (design == DesignKind::ar1 && std::abs(rho_ar) >= 1.0)
    throw std::invalid_argument("scenario: |rho| must be < 1");
  if (design == DesignKind::equicorr && (a_p <= 0.0 || eps_eq <= 0.0))
    throw std::invalid_argument("scenario: equicorr parameters must be > 0");
  if (design == DesignKind::custom && custom_sigma.rows() != p)
    throw std::invalid_argument("scenario: custom sigma size mismatch");
}

GaussianDesignModel build_model(const SimScenario& scenario) {
  scenario.validate();
  switch (scenario.design) {
    case DesignKind::ar1: {
      GaussianDesignModel m =
          GaussianDesignModel::FromCovariance(ar1_covariance(scenario.p, scenario.rho_ar));
      return m;
    }
    case DesignKind::equicorr: {
      GaussianDesignModel m =
          equicorrelated_from_precision(scenario.p, scenario.a_p, scenario.eps_eq);
      m.knockoff_s = Vector::Constant(
          scenario.p, eq_knockoff_s(scenario.p, scenario.a_p, scenario.eps_eq));
      return m;
    }
    case DesignKind::custom:
      return GaussianDesignModel::FromCovariance(scenario.custom_sigma);
  }
  throw std::logic_error("scenario: bad design kind");
}

// --- update-error experiment -----------------------------------------------

UpdateErrorResult run_update_error_experiment(const UpdateErrorOptions& options) {
  const std::vector<double>& inner =
      options.three_point ? options.xi_values : options.rho_values;
  if (options.alpha_scales.empty() || inner.empty())
    throw std::invalid_argument("update-error: empty grid");
  if (options.reps < 1)
    throw std::invalid_argument("update-error: reps must be >= 1");

  UpdateErrorResult result;
  const Rng master(options.seed);
  std::uint64_t cell = 0;
  for (double v : inner) {
    for (double a : options.alpha_scales) {
      const Index n = static_cast<Index>(std::lround(800.0 * a));
      const Index p = static_cast<Index>(std::lround(1000.0 * a));
      const Index s = static_cast<Index>(std::lround(400.0 * a));
      const Index m = static_cast<Index>(
          std::floor(static_cast<double>(p) / (10.0 * a)));
      const double rho = options.three_point ? 0.5 : v;
      const GaussianDesignModel model =
          GaussianDesignModel::FromCovariance(ar1_covariance(p, rho));

      std::vector<double> lasso_errs, db_errs;
      for (int r = 0; r < options.reps; ++r) {
        Rng rng_a = master.substream("ue-design", cell, static_cast<std::uint64_t>(r));
        const Matrix A = sample_design(n, model, rng_a);
        Rng rng_c = master.substream("ue-coef", cell, static_cast<std::uint64_t>(r));
        const SparseCoefficients coef =
            sparse_coefficients(p, s, CoefSpec::gaussian_support, 0.0, rng_c);
        Rng rng_w = master.substream("ue-noise", cell, static_cast<std::uint64_t>(r));
        const Vector Y = generate_response(A, coef.values,
                                           0.01 * static_cast<double>(n), rng_w);

        const LassoFit fit = solve_lasso({A, Y, options.lambda});
        const ProjectionFamily family(A, fit.active_set);
        ExactRefitOracle oracle(A, Y, options.lambda);

        Rng rng_j = master.substream("ue-coords", cell, static_cast<std::uint64_t>(r));
        const IndexList coords = sample_subset(p, m, rng_j);

        std::vector<std::pair<double, double>> lasso_pairs, db_pairs;
        for (Index j : coords) {
          const double tjj = model.theta(j, j);
          const Vector mu = A.col(j) - A * model.theta.col(j) / tjj;
          Rng rng_b = master.substream(
              "ue-resample", cell * 1000003ull + static_cast<std::uint64_t>(j),
              static_cast<std::uint64_t>(r));
          const Vector B =
              options.three_point
                  ? three_point_column_sample_mu(mu, tjj, v, rng_b)
                  : conditional_column_sample_mu(mu, tjj, rng_b);
          const ColumnUpdater updater(A, fit, options.lambda, family, mu, j);
          ExactUpdate exact;
          try {
            exact = oracle.evaluate_with_mu(j, B, mu, &fit);
          } catch (const SolverError&) {
            ++result.solver_failures;
            continue;
          }
          const double approx_lasso = updater.lasso_approx(B).value_or(0.0);
          lasso_pairs.emplace_back(approx_lasso, exact.lasso);
          if (!exact.degenerate) {
            const double approx_db = updater.debias_approx(B).value_or(0.0);
            db_pairs.emplace_back(approx_db, exact.debiased);
            if (r == 0) {
              result.percoord.push_back(
                  {j, "debiased", approx_db, exact.debiased,
                   approx_db - exact.debiased});
              result.percoord.push_back(
                  {j, "lasso", approx_lasso, exact.lasso,
                   approx_lasso - exact.lasso});
            }
          }
        }
        lasso_errs.push_back(normalized_update_error(lasso_pairs));
        db_errs.push_back(normalized_update_error(db_pairs));
      }

      const std::string experiment =
          options.three_point ? "update-error-3pt" : "update-error-ar1";
      result.rows.push_back({experiment, a, v, "lasso-error", mean_of(lasso_errs),
                             options.reps, stderr_of(lasso_errs)});
      result.rows.push_back({experiment, a, v, "debiased-error", mean_of(db_errs),
                             options.reps, stderr_of(db_errs)});
      ++cell;
    }
  }
  return result;
}

// --- FDR benchmark ---------------------------------------------------------

std::string MethodSpec::label() const {
  return (engine == Engine::approx ? "approx-" : "exact-") + name;
}

namespace {

const std::vector<std::string> kMethodNames = {
    "knockoff", "knockoff-db", "local-knockoff", "local-knockoff-db", "crt",
    "crt-db"};

bool needs_knockoffs(const std::string& name) {
  return name == "knockoff" || name == "knockoff-db";
}

// Everything one replicate needs to run every method on identical data.
struct RepData {
  const Matrix* A = nullptr;
  const Vector* Y = nullptr;
  const Matrix* knockoffs = nullptr;        // null unless a knockoff method runs
  const Matrix* joint_precision = nullptr;  // null unless knockoff-db runs
  const Residualizer* residualizer = nullptr;
  ColumnSampler sampler;
  double lambda = 0.0;
  double q = 0.1;
  int crt_reps = 100;
  double epsilon = 0.0;
};

SelectionOutcome run_one_method(const MethodSpec& method, const RepData& d) {
  if (method.name == "knockoff" || method.name == "knockoff-db") {
    if (!d.knockoffs)
      throw std::logic_error("fdr-bench: knockoff matrix not prepared");
    const KnockoffStatistic stat = method.name == "knockoff"
                                       ? KnockoffStatistic::lasso_diff
                                       : KnockoffStatistic::debiased_diff;
    return knockoff_filter(*d.A, *d.knockoffs, *d.Y, d.lambda, d.q, stat, 0,
                           d.joint_precision);
  }
  const SelStatistic stat = (method.name == "local-knockoff-db" ||
                             method.name == "crt-db")
                                ? SelStatistic::debiased
                                : SelStatistic::lasso;
  if (method.name == "local-knockoff" || method.name == "local-knockoff-db")
    return local_knockoff_filter(*d.A, *d.Y, d.lambda, d.q, *d.residualizer,
                                 d.sampler, stat, d.epsilon, method.engine);
  if (method.name == "crt" || method.name == "crt-db")
    return crt(*d.A, *d.Y, d.lambda, d.q, d.crt_reps, *d.residualizer, d.sampler,
               stat, method.engine);
  throw std::invalid_argument("fdr-bench: unknown method " + method.name);
}

struct MethodAccumulator {
  MethodSummary summary;
  std::vector<double> seconds;
};

void summarize(MethodAccumulator& acc) {
  acc.summary.fdr = mean_of(acc.summary.fdp_per_rep);
  acc.summary.power = mean_of(acc.summary.power_per_rep);
  acc.summary.fdr_stderr = stderr_of(acc.summary.fdp_per_rep);
  acc.summary.power_stderr = stderr_of(acc.summary.power_per_rep);
  acc.summary.seconds_per_rep = mean_of(acc.seconds);
}

std::vector<TableRow> summary_rows(const std::string& experiment, double param1,
                                   double param2,
                                   const std::vector<MethodSummary>& summaries,
                                   int reps) {
  std::vector<TableRow> rows;
  for (const MethodSummary& s : summaries) {
    rows.push_back({experiment, param1, param2, s.label + ":fdr", s.fdr, reps,
                    s.fdr_stderr});
    rows.push_back({experiment, param1, param2, s.label + ":power", s.power, reps,
                    s.power_stderr});
    rows.push_back({experiment, param1, param2, s.label + ":seconds-per-rep",
                    s.seconds_per_rep, reps, 0.0});
    rows.push_back({experiment, param1, param2, s.label + ":lasso-solves",
                    static_cast<double>(s.lasso_solves), reps, 0.0});
  }
  return rows;
}

}  // namespace

FdrBenchResult run_fdr_bench(const SimScenario& scenario,
                             const std::vector<MethodSpec>& methods, int reps,
                             std::uint64_t seed) {
  scenario.validate();
  if (methods.empty()) throw std::invalid_argument("fdr-bench: no methods");
  if (reps < 1) throw std::invalid_argument("fdr-bench: reps must be >= 1");
  for (const MethodSpec& m : methods)
    if (std::find(kMethodNames.begin(), kMethodNames.end(), m.name) ==
        kMethodNames.end())
      throw std::invalid_argument("fdr-bench: unknown method " + m.name);

  GaussianDesignModel model = build_model(scenario);
  const bool any_knockoff =
      std::any_of(methods.begin(), methods.end(),
                  [](const MethodSpec& m) { return needs_knockoffs(m.name); });
  const bool any_knockoff_db =
      std::any_of(methods.begin(), methods.end(),
                  [](const MethodSpec& m) { return m.name == "knockoff-db"; });
  if (any_knockoff && !model.knockoff_s) model.knockoff_s = generic_knockoff_s(model);

  Matrix joint_precision;
  if (any_knockoff_db) {
    const Index p = scenario.p;
    Matrix joint_sigma(2 * p, 2 * p);
    const Matrix off = model.sigma - Matrix(model.knockoff_s->asDiagonal());
    joint_sigma.topLeftCorner(p, p) = model.sigma;
    joint_sigma.bottomRightCorner(p, p) = model.sigma;
    joint_sigma.topRightCorner(p, p) = off;
    joint_sigma.bottomLeftCorner(p, p) = off;
    Eigen::LLT<Matrix> llt(joint_sigma);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("fdr-bench: joint knockoff covariance not PD");
    joint_precision = llt.solve(Matrix::Identity(2 * p, 2 * p));
  }

  const Rng master(seed);
  const Residualizer residualizer = Residualizer::GaussianConditional(model.theta);

  std::vector<MethodAccumulator> accs(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m)
    accs[m].summary.label = methods[m].label();

  FdrBenchResult result;
  for (int r = 0; r < reps; ++r) {
    Rng rng_a = master.substream("fdr-design", static_cast<std::uint64_t>(r));
    const Matrix A = sample_design(scenario.n, model, rng_a);
    Rng rng_c = master.substream("fdr-coef", static_cast<std::uint64_t>(r));
    const double amp =
        scenario.coef == CoefSpec::fixed_amplitude
            ? scenario.amplitude / std::sqrt(static_cast<double>(scenario.n))
            : 0.0;
    const SparseCoefficients coef =
        sparse_coefficients(scenario.p, scenario.s, scenario.coef, amp, rng_c);
    Rng rng_w = master.substream("fdr-noise", static_cast<std::uint64_t>(r));
    const Vector Y =
        generate_response(A, coef.values, scenario.noise_variance, rng_w);

    Matrix knockoffs;
    if (any_knockoff) {
      Rng rng_k = master.substream("fdr-knockoff", static_cast<std::uint64_t>(r));
      knockoffs = model_x_knockoff_sample(A, model, rng_k);
    }

    RepData data;
    data.A = &A;
    data.Y = &Y;
    if (any_knockoff) data.knockoffs = &knockoffs;
    if (any_knockoff_db) data.joint_precision = &joint_precision;
    data.residualizer = &residualizer;
    data.lambda = scenario.lambda;
    data.q = scenario.q;
    data.crt_reps = scenario.crt_repetitions;
    const Index p = scenario.p;
    const Matrix mu = residualizer.mu_matrix(A);
    const int rep = r;
    data.sampler = [&, rep](Index j, int b) {
      Rng rng = master.substream(
          "fdr-resample",
          static_cast<std::uint64_t>(rep) * static_cast<std::uint64_t>(p) +
              static_cast<std::uint64_t>(j),
          static_cast<std::uint64_t>(b));
      return conditional_column_sample_mu(mu.col(j), model.theta(j, j), rng);
    };

    // Run every method; a failure drops the replicate symmetrically.
    std::vector<SelectionOutcome> outcomes;
    std::vector<double> secs;
    std::vector<std::uint64_t> solves;
    bool ok = true;
    for (const MethodSpec& method : methods) {
      const std::uint64_t c0 = lasso_solve_count();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        outcomes.push_back(run_one_method(method, data));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
      secs.push_back(seconds_since(t0));
      solves.push_back(lasso_solve_count() - c0);
    }
    if (!ok) {
      ++result.dropped_reps;
      continue;
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      score_outcome(outcomes[m], coef.support);
      accs[m].summary.fdp_per_rep.push_back(*outcomes[m].fdp);
      accs[m].summary.power_per_rep.push_back(*outcomes[m].power);
      accs[m].summary.lasso_solves += solves[m];
      accs[m].seconds.push_back(secs[m]);
    }
  }

  result.reps = reps - result.dropped_reps;
  for (MethodAccumulator& acc : accs) {
    summarize(acc);
    result.summaries.push_back(acc.summary);
  }
  result.rows = summary_rows("fdr-bench", scenario.amplitude,
                             static_cast<double>(scenario.s), result.summaries,
                             result.reps);
  return result;
}

// --- knockoff-precision diagnostics ----------------------------------------

DiagKnockoffResult diag_knockoff(const std::vector<Index>& p_grid, double eps_eq,
                                 double perturb) {
  DiagKnockoffResult result;
  for (Index p : p_grid) {
    const double dp = static_cast<double>(p);
    // Singular equicorrelated precision E with s = 1/p; threshold p/10.
    {
      const Matrix theta = Matrix::Ones(p, p);
      const Vector s = Vector::Constant(p, 1.0 / dp);
      const KnockoffPrecisionDiag d =
          knockoff_precision_diagnostic(theta, s, dp / 10.0, perturb);
      result.rows.push_back({"diag-knockoff", dp, 0.0, "singular-eq-fraction",
                             d.fraction_exceeding, 1, 0.0});
    }
    // Vanishing-precision scaling a_p = 1/p with the closed-form knockoff s;
    // threshold p a_p / 10.
    {
      const double a_p = 1.0 / dp;
      const Matrix theta =
          a_p * (Matrix::Ones(p, p) + eps_eq * Matrix::Identity(p, p));
      // The boundary-optimal s makes the Schur complement exactly singular;
      // shrink slightly so the factorization exists.
      const Vector s =
          Vector::Constant(p, (1.0 - 1e-6) * eq_knockoff_s(p, a_p, eps_eq));
      const KnockoffPrecisionDiag d =
          knockoff_precision_diagnostic(theta, s, dp * a_p / 10.0, 0.0);
      result.rows.push_back({"diag-knockoff", dp, eps_eq, "scaled-eq-fraction",
                             d.fraction_exceeding, 1, 0.0});
    }
    // Identity precision with s = 1: every diagonal is exactly 1.
    {
      const Matrix theta = Matrix::Identity(p, p);
      const Vector s = Vector::Ones(p);
      const KnockoffPrecisionDiag d =
          knockoff_precision_diagnostic(theta, s, dp / 10.0, 0.0);
      result.rows.push_back({"diag-knockoff", dp, 0.0, "identity-fraction",
                             d.fraction_exceeding, 1, 0.0});
    }
  }
  return result;
}

// --- semi-real pipeline ----------------------------------------------------

IndexList prune_correlated(const Matrix& data, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0))
    throw std::invalid_argument("prune_correlated: cutoff must be in (0, 1)");
  const Index p = data.cols();
  // Column correlation matrix from centered, normalized columns.
  Matrix z = data;
  for (Index j = 0; j < p; ++j) {
    z.col(j).array() -= z.col(j).mean();
    const double norm = z.col(j).norm();
    if (norm > 0.0) z.col(j) /= norm;
  }
  const Matrix corr = (z.transpose() * z).cwiseAbs();

  std::vector<bool> kept(static_cast<std::size_t>(p), true);
  while (true) {
    double worst = cutoff;
    Index wa = -1, wb = -1;
    for (Index a = 0; a < p; ++a) {
      if (!kept[static_cast<std::size_t>(a)]) continue;
      for (Index b = a + 1; b < p; ++b) {
        if (!kept[static_cast<std::size_t>(b)]) continue;
        if (corr(a, b) > worst) {
          worst = corr(a, b);
          wa = a;
          wb = b;
        }
      }
    }
    if (wa < 0) break;
    auto mean_abs_corr = [&](Index c) {
      double sum = 0.0;
      int count = 0;
      for (Index o = 0; o < p; ++o) {
        if (o == c || !kept[static_cast<std::size_t>(o)]) continue;
        sum += corr(c, o);
        ++count;
      }
      return count > 0 ? sum / count : 0.0;
    };
    const double ma = mean_abs_corr(wa);
    const double mb = mean_abs_corr(wb);
    const Index drop = ma > mb ? wa : (mb > ma ? wb : std::max(wa, wb));
    kept[static_cast<std::size_t>(drop)] = false;
  }

  IndexList out;
  for (Index j = 0; j < p; ++j)
    if (kept[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

SemiRealResult semi_real_pipeline(const Matrix& design, const Vector& response,
                                  const SemiRealOptions& options) {
  const Index n = design.rows();
  const Index p = design.cols();
  if (p < 2) throw std::invalid_argument("semi-real: need p >= 2 columns");
  if (response.size() != n)
    throw std::invalid_argument("semi-real: response length mismatch");
  if (options.methods.empty())
    throw std::invalid_argument("semi-real: no methods");
  if (!(options.q > 0.0 && options.q < 1.0))
    throw std::invalid_argument("semi-real: q must be in (0, 1)");
  if (options.reps < 1)
    throw std::invalid_argument("semi-real: reps must be >= 1");
  for (const MethodSpec& m : options.methods)
    if (needs_knockoffs(m.name))
      throw std::invalid_argument(
          "semi-real: knockoff methods are not supported in this pipeline");

  // Regularization chosen by cross-validation on the observed response.
  std::vector<double> grid = options.lambda_grid;
  if (grid.empty()) {
    const double lmax =
        (design.transpose() * response).cwiseAbs().maxCoeff() /
        static_cast<double>(n);
    for (int i = 0; i < 30; ++i)
      grid.push_back(lmax * std::pow(10.0, -3.0 * i / 29.0));
  }
  const CvResult cv = cross_validate_lambda(design, response, grid,
                                            options.cv_folds, options.seed);
  const LassoFit base_fit = solve_lasso({design, response, cv.best_lambda});

  SemiRealResult result;
  result.cv_lambda = cv.best_lambda;
  result.truth = base_fit.active_set;
  result.noise_estimate =
      base_fit.residual.squaredNorm() / static_cast<double>(n);
  if (result.noise_estimate <= 0.0)
    throw std::runtime_error("semi-real: degenerate noise estimate");

  // Precision for residualization/sampling: user-supplied or shrinkage inverse.
  Matrix precision;
  if (options.user_precision) {
    precision = *options.user_precision;
    if (precision.rows() != p || precision.cols() != p)
      throw std::invalid_argument("semi-real: precision size mismatch");
  } else {
    Matrix centered = design;
    for (Index j = 0; j < p; ++j) centered.col(j).array() -= centered.col(j).mean();
    Matrix sigma_hat =
        centered.transpose() * centered / static_cast<double>(n - 1);
    const double delta =
        options.shrinkage_delta_factor * sigma_hat.diagonal().mean();
    sigma_hat.diagonal().array() += delta;
    Eigen::LLT<Matrix> llt(sigma_hat);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("semi-real: shrinkage covariance not PD");
    precision = llt.solve(Matrix::Identity(p, p));
  }

  const Residualizer residualizer = Residualizer::GaussianConditional(precision);
  const Matrix mu = residualizer.mu_matrix(design);
  const Rng master(options.seed);

  std::vector<MethodAccumulator> accs(options.methods.size());
  for (std::size_t m = 0; m < options.methods.size(); ++m)
    accs[m].summary.label = options.methods[m].label();

  int dropped = 0;
  for (int r = 0; r < options.reps; ++r) {
    Rng rng_w = master.substream("sr-noise", static_cast<std::uint64_t>(r));
    const Vector Y = generate_response(design, base_fit.coefficients,
                                       result.noise_estimate, rng_w);

    RepData data;
    data.A = &design;
    data.Y = &Y;
    data.residualizer = &residualizer;
    data.lambda = cv.best_lambda;
    data.q = options.q;
    data.crt_reps = options.crt_repetitions;
    const int rep = r;
    data.sampler = [&, rep](Index j, int b) {
      Rng rng = master.substream(
          "sr-resample",
          static_cast<std::uint64_t>(rep) * static_cast<std::uint64_t>(p) +
              static_cast<std::uint64_t>(j),
          static_cast<std::uint64_t>(b));
      return conditional_column_sample_mu(mu.col(j), precision(j, j), rng);
    };

    std::vector<SelectionOutcome> outcomes;
    std::vector<double> secs;
    std::vector<std::uint64_t> solves;
    bool ok = true;
    for (const MethodSpec& method : options.methods) {
      const std::uint64_t c0 = lasso_solve_count();
      const auto t0 = std::chrono::steady_clock::now();
      try {
        outcomes.push_back(run_one_method(method, data));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
      secs.push_back(seconds_since(t0));
      solves.push_back(lasso_solve_count() - c0);
    }
    if (!ok) {
      ++dropped;
      continue;
    }
    for (std::size_t m = 0; m < options.methods.size(); ++m) {
      score_outcome(outcomes[m], result.truth);
      accs[m].summary.fdp_per_rep.push_back(*outcomes[m].fdp);
      accs[m].summary.power_per_rep.push_back(*outcomes[m].power);
      accs[m].summary.lasso_solves += solves[m];
      accs[m].seconds.push_back(secs[m]);
    }
  }

  for (MethodAccumulator& acc : accs) {
    summarize(acc);
    result.summaries.push_back(acc.summary);
  }
  result.rows = summary_rows("semi-real", static_cast<double>(result.truth.size()),
                             result.noise_estimate, result.summaries,
                             options.reps - dropped);
  result.rows.push_back({"semi-real", 0.0, 0.0, "cv-lambda", cv.best_lambda,
                         options.reps - dropped, 0.0});
  return result;
}

// --- run manifest ----------------------------------------------------------

std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a 64 offset basis
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["master_seed"] = master_seed;
  j["tool_version"] = tool_version;
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : config_snapshot.entries()) cfg[k] = v;
  j["config"] = cfg;
  nlohmann::json stages = nlohmann::json::object();
  for (const auto& [k, v] : stage_seconds) stages[k] = v;
  j["stage_seconds"] = stages;
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& [k, v] : output_digests) digests[k] = v;
  j["output_digests"] = digests;
  return j.dump(2) + "\n";
}

}  // namespace lcu
