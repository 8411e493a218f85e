#include "lcu/selection.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lcu/projection.hpp"
#include "lcu/update.hpp"

namespace lcu {

namespace {

void validate_q(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("selection: q must be in (0, 1)");
}

Vector primary_statistic(SelStatistic statistic, const LassoFit& fit,
                         const DebiasResult& debias) {
  switch (statistic) {
    case SelStatistic::debiased: return debias.alpha_u;
    case SelStatistic::lasso: return fit.coefficients;
    case SelStatistic::tstat: return debias.t_stats;
  }
  throw std::logic_error("selection: bad statistic");
}

double approx_gamma(SelStatistic statistic, const ColumnUpdater& updater,
                    const Vector& column) {
  switch (statistic) {
    case SelStatistic::debiased:
      return updater.debias_approx(column).value_or(0.0);
    case SelStatistic::lasso:
      return updater.lasso_approx(column).value_or(0.0);
    case SelStatistic::tstat:
      return updater.t_approx(column);
  }
  throw std::logic_error("selection: bad statistic");
}

double exact_gamma(SelStatistic statistic, const ExactUpdate& update) {
  switch (statistic) {
    case SelStatistic::debiased:
      return update.degenerate ? 0.0 : update.debiased;
    case SelStatistic::lasso:
      return update.lasso;
    case SelStatistic::tstat:
      return update.t_stat;
  }
  throw std::logic_error("selection: bad statistic");
}

// Smallest t over the finite candidate set with
// |{j : |gamma_j| > t - eps}| / |{j : |primary_j| > t}| <= q.
double local_knockoff_threshold(const Vector& primary, const Vector& gamma,
                                double q, double epsilon) {
  std::set<double> candidates;
  for (Index j = 0; j < primary.size(); ++j) {
    candidates.insert(std::abs(primary[j]));
    candidates.insert(std::abs(gamma[j]) + epsilon);
  }
  for (double t : candidates) {
    Index num = 0, den = 0;
    for (Index j = 0; j < primary.size(); ++j) {
      if (std::abs(gamma[j]) > t - epsilon) ++num;
      if (std::abs(primary[j]) > t) ++den;
    }
    if (den > 0 && static_cast<double>(num) / static_cast<double>(den) <= q)
      return t;
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

SelectionOutcome local_knockoff_filter(const Matrix& design, const Vector& response,
                                       double lambda, double q,
                                       const Residualizer& residualizer,
                                       const ColumnSampler& sampler,
                                       SelStatistic statistic, double epsilon,
                                       Engine engine) {
  validate_q(q);
  if (epsilon < 0.0)
    throw std::invalid_argument("local_knockoff: epsilon must be >= 0");
  const Index p = design.cols();
  const LassoFit fit = solve_lasso({design, response, lambda});
  const ProjectionFamily family(design, fit.active_set);
  const Matrix mu = residualizer.mu_matrix(design);
  const DebiasResult debias = debias_generalized(design, response, fit, residualizer);

  SelectionOutcome out;
  out.method = engine == Engine::approx ? "approx-local-knockoff" : "exact-local-knockoff";
  out.epsilon = epsilon;
  out.stats_primary = primary_statistic(statistic, fit, debias);
  out.stats_resampled = Vector::Zero(p);

  std::optional<ExactRefitOracle> oracle;
  if (engine == Engine::exact) oracle.emplace(design, response, lambda);

  for (Index j = 0; j < p; ++j) {
    const Vector column = sampler(j, 0);
    if (engine == Engine::approx) {
      const ColumnUpdater updater(design, fit, lambda, family, mu.col(j), j);
      out.stats_resampled[j] = approx_gamma(statistic, updater, column);
    } else {
      out.stats_resampled[j] =
          exact_gamma(statistic, oracle->evaluate_with_mu(j, column, mu.col(j), &fit));
    }
  }

  out.threshold =
      local_knockoff_threshold(out.stats_primary, out.stats_resampled, q, epsilon);
  for (Index j = 0; j < p; ++j)
    if (std::abs(out.stats_primary[j]) > out.threshold) out.selected.push_back(j);
  return out;
}

SelectionOutcome crt(const Matrix& design, const Vector& response, double lambda,
                     double q, int repetitions, const Residualizer& residualizer,
                     const ColumnSampler& sampler, SelStatistic statistic,
                     Engine engine) {
  validate_q(q);
  if (repetitions < 1)
    throw std::invalid_argument("crt: repetitions must be >= 1");
  const Index p = design.cols();
  const LassoFit fit = solve_lasso({design, response, lambda});
  const ProjectionFamily family(design, fit.active_set);
  const Matrix mu = residualizer.mu_matrix(design);
  const DebiasResult debias = debias_generalized(design, response, fit, residualizer);

  SelectionOutcome out;
  out.method = engine == Engine::approx ? "approx-crt" : "exact-crt";
  out.stats_primary = primary_statistic(statistic, fit, debias);
  out.p_values = Vector::Zero(p);

  std::optional<ExactRefitOracle> oracle;
  if (engine == Engine::exact) oracle.emplace(design, response, lambda);

  for (Index j = 0; j < p; ++j) {
    const ColumnUpdater updater(design, fit, lambda, family, mu.col(j), j);
    const double observed = std::abs(out.stats_primary[j]);
    int exceed = 0;
    for (int b = 0; b < repetitions; ++b) {
      const Vector column = sampler(j, b);
      double gamma;
      if (engine == Engine::approx)
        gamma = approx_gamma(statistic, updater, column);
      else
        gamma = exact_gamma(statistic,
                            oracle->evaluate_with_mu(j, column, mu.col(j), &fit));
      if (observed <= std::abs(gamma)) ++exceed;
    }
    out.p_values[j] = static_cast<double>(1 + exceed) /
                      static_cast<double>(repetitions + 1);
  }

  out.selected = benjamini_hochberg(out.p_values, q);
  return out;
}

IndexList benjamini_hochberg(const Vector& p_values, double q) {
  validate_q(q);
  const Index m = p_values.size();
  for (Index j = 0; j < m; ++j)
    if (!(p_values[j] >= 0.0 && p_values[j] <= 1.0))
      throw std::invalid_argument("benjamini_hochberg: p-values must be in [0, 1]");
  std::vector<double> sorted(p_values.data(), p_values.data() + m);
  std::sort(sorted.begin(), sorted.end());
  double cutoff = -1.0;
  for (Index i = m; i >= 1; --i) {
    if (sorted[static_cast<std::size_t>(i - 1)] <=
        static_cast<double>(i) * q / static_cast<double>(m)) {
      cutoff = sorted[static_cast<std::size_t>(i - 1)];
      break;
    }
  }
  IndexList selected;
  if (cutoff < 0.0) return selected;
  for (Index j = 0; j < m; ++j)
    if (p_values[j] <= cutoff) selected.push_back(j);
  return selected;
}

SelectionOutcome knockoff_filter(const Matrix& design, const Matrix& knockoffs,
                                 const Vector& response, double lambda, double q,
                                 KnockoffStatistic statistic, int offset,
                                 const Matrix* joint_precision) {
  validate_q(q);
  if (knockoffs.rows() != design.rows() || knockoffs.cols() != design.cols())
    throw std::invalid_argument("knockoff_filter: knockoff shape mismatch");
  if (offset != 0 && offset != 1)
    throw std::invalid_argument("knockoff_filter: offset must be 0 or 1");
  const Index n = design.rows();
  const Index p = design.cols();
  Matrix augmented(n, 2 * p);
  augmented.leftCols(p) = design;
  augmented.rightCols(p) = knockoffs;

  const LassoFit fit = solve_lasso({augmented, response, lambda});
  Vector stat;
  if (statistic == KnockoffStatistic::lasso_diff) {
    stat = fit.coefficients;
  } else {
    if (!joint_precision)
      throw std::invalid_argument(
          "knockoff_filter: debiased_diff requires the joint precision");
    const DebiasResult debias = debias_generalized(
        augmented, response, fit, Residualizer::GaussianConditional(*joint_precision));
    stat = debias.alpha_u;
  }

  SelectionOutcome out;
  out.method = statistic == KnockoffStatistic::lasso_diff ? "knockoff" : "knockoff-db";
  Vector w(p);
  for (Index j = 0; j < p; ++j)
    w[j] = std::abs(stat[j]) - std::abs(stat[j + p]);
  out.stats_primary = w;

  std::set<double> candidates;
  for (Index j = 0; j < p; ++j)
    if (w[j] != 0.0) candidates.insert(std::abs(w[j]));
  for (double t : candidates) {
    Index neg = 0, pos = 0;
    for (Index j = 0; j < p; ++j) {
      if (w[j] <= -t) ++neg;
      if (w[j] >= t) ++pos;
    }
    const double ratio = (static_cast<double>(offset) + static_cast<double>(neg)) /
                         std::max<double>(1.0, static_cast<double>(pos));
    if (ratio <= q) {
      out.threshold = t;
      break;
    }
  }
  if (std::isfinite(out.threshold))
    for (Index j = 0; j < p; ++j)
      if (w[j] >= out.threshold) out.selected.push_back(j);
  return out;
}

std::pair<double, double> fdp_power(const IndexList& selected,
                                    const IndexList& truth) {
  std::set<Index> h1(truth.begin(), truth.end());
  Index true_pos = 0;
  for (Index j : selected)
    if (h1.count(j)) ++true_pos;
  const double fdp = static_cast<double>(static_cast<Index>(selected.size()) - true_pos) /
                     std::max<double>(1.0, static_cast<double>(selected.size()));
  const double power = static_cast<double>(true_pos) /
                       std::max<double>(1.0, static_cast<double>(h1.size()));
  return {fdp, power};
}

void score_outcome(SelectionOutcome& outcome, const IndexList& truth) {
  const auto [fdp, power] = fdp_power(outcome.selected, truth);
  outcome.fdp = fdp;
  outcome.power = power;
}

OracleThreshold empirical_oracle_threshold(const std::vector<Vector>& statistic_runs,
                                           const std::vector<IndexList>& truths,
                                           double q) {
  if (statistic_runs.size() < 20)
    throw std::invalid_argument("oracle threshold: need >= 20 replicates");
  if (statistic_runs.size() != truths.size())
    throw std::invalid_argument("oracle threshold: runs/truths length mismatch");
  if (!(q > 0.0 && q <= 1.0))
    throw std::invalid_argument("oracle threshold: q must be in (0, 1]");

  std::set<double> grid;
  grid.insert(0.0);
  for (const Vector& run : statistic_runs)
    for (Index j = 0; j < run.size(); ++j) grid.insert(std::abs(run[j]));

  auto evaluate = [&](double t) {
    double fdr = 0.0, power = 0.0;
    for (std::size_t r = 0; r < statistic_runs.size(); ++r) {
      IndexList selected;
      const Vector& run = statistic_runs[r];
      for (Index j = 0; j < run.size(); ++j)
        if (std::abs(run[j]) > t) selected.push_back(j);
      const auto [fdp, pw] = fdp_power(selected, truths[r]);
      fdr += fdp;
      power += pw;
    }
    const double reps = static_cast<double>(statistic_runs.size());
    return std::pair<double, double>{fdr / reps, power / reps};
  };

  for (double t : grid) {
    const auto [fdr, power] = evaluate(t);
    if (fdr <= q) return {t, fdr, power};
  }
  // Largest grid value selects nothing, so FDR 0 always terminates above.
  throw std::logic_error("oracle threshold: unreachable");
}

}  // namespace lcu
