#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "lcu/debias.hpp"
#include "lcu/lasso.hpp"
#include "lcu/residualize.hpp"
#include "lcu/types.hpp"

namespace lcu {

enum class SelStatistic { debiased, lasso, tstat };
enum class Engine { approx, exact };
enum class KnockoffStatistic { lasso_diff, debiased_diff };

// Produces one conditional resample of column j; the replicate index selects
// the CRT repetition (0 for single-resample methods). Implementations must be
// deterministic in (j, replicate).
using ColumnSampler = std::function<Vector(Index j, int replicate)>;

struct SelectionOutcome {
  std::string method;
  IndexList selected;
  double threshold = std::numeric_limits<double>::infinity();
  Vector p_values;         // CRT only
  Vector stats_primary;    // statistic on the observed design (or W)
  Vector stats_resampled;  // gamma-hat (single-resample methods)
  double epsilon = 0.0;
  std::optional<double> fdp;
  std::optional<double> power;
};

SelectionOutcome local_knockoff_filter(const Matrix& design, const Vector& response,
                                       double lambda, double q,
                                       const Residualizer& residualizer,
                                       const ColumnSampler& sampler,
                                       SelStatistic statistic, double epsilon,
                                       Engine engine);

SelectionOutcome crt(const Matrix& design, const Vector& response, double lambda,
                     double q, int repetitions, const Residualizer& residualizer,
                     const ColumnSampler& sampler, SelStatistic statistic,
                     Engine engine);

IndexList benjamini_hochberg(const Vector& p_values, double q);

// Classic model-X knockoff filter on the augmented [A, Atilde] design.
// joint_precision (2p x 2p) is required for the debiased_diff statistic.
SelectionOutcome knockoff_filter(const Matrix& design, const Matrix& knockoffs,
                                 const Vector& response, double lambda, double q,
                                 KnockoffStatistic statistic, int offset,
                                 const Matrix* joint_precision = nullptr);

// (fdp, power) against ground truth H1. Empty selections score (0, 0).
std::pair<double, double> fdp_power(const IndexList& selected,
                                    const IndexList& truth);

void score_outcome(SelectionOutcome& outcome, const IndexList& truth);

struct OracleThreshold {
  double threshold = 0.0;
  double fdr = 0.0;
  double power = 0.0;
};

// Monte-Carlo calibrated benchmark threshold: smallest pooled-grid t whose
// empirical FDR across replicates is <= q.
OracleThreshold empirical_oracle_threshold(const std::vector<Vector>& statistic_runs,
                                           const std::vector<IndexList>& truths,
                                           double q);

}  // namespace lcu
