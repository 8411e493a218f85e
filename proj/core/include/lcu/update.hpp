#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lcu/debias.hpp"
#include "lcu/lasso.hpp"
#include "lcu/projection.hpp"
#include "lcu/residualize.hpp"
#include "lcu/types.hpp"

namespace lcu {

enum class UpdateMode { full, dropped };

// One-column update statistics: given a fit on A and a candidate replacement
// for column j, approximate the statistics of the refit on B without solving
// the second Lasso. Binds the per-j quantities ((I - P_j) A_:j, mu_:j, R) once
// so that many candidate columns (CRT resamples) reuse them.
class ColumnUpdater {
 public:
  ColumnUpdater(const Matrix& design, const LassoFit& fit, double lambda,
                const ProjectionFamily& family, const Residualizer& residualizer,
                Index j);
  // Variant taking a precomputed centering column, avoiding per-j
  // residualizer work when the caller already holds the full mu matrix.
  ColumnUpdater(const Matrix& design, const LassoFit& fit, double lambda,
                const ProjectionFamily& family, Vector mu_col, Index j);

  // Approximate updated debiased coefficient:
  //   [Bcheck^T R + Bcheck^T (I-P_j) A_:j * alpha_j] / [Bcheck^T (I-P_j) B_:j]
  // (dropped mode omits the middle term). Degenerate denominators yield
  // nullopt.
  std::optional<double> debias_approx(const Vector& new_column,
                                      UpdateMode mode = UpdateMode::full) const;

  // Approximate updated t-statistic (never divides):
  //   (1/n) Bcheck^T R + (1/n) Bcheck^T (I-P_j) A_:j * alpha_j
  double t_approx(const Vector& new_column, UpdateMode mode = UpdateMode::full) const;

  // Approximate updated Lasso coefficient (soft-threshold update; raw B_:j,
  // no residualization).
  std::optional<double> lasso_approx(const Vector& new_column) const;

  Index j() const { return j_; }
  const Vector& mu_column() const { return mu_; }

 private:
  const Matrix* design_;
  const LassoFit* fit_;
  const ProjectionFamily* family_;
  Index j_;
  double lambda_;
  Vector mu_;         // centering column
  Vector u_;          // (I - P_j) A_:j
  double alpha_j_;
  double n_;
};

struct ExactUpdate {
  double lasso = 0.0;       // refit beta_j
  double debiased = 0.0;    // refit debiased coefficient (refit active set)
  double t_stat = 0.0;      // refit t(j, B, Y)
  bool degenerate = false;  // refit denominator below the floor
  LassoFit fit_b;
};

// Definitionally exact recomputation: re-solves the Lasso with column j
// replaced (warm-started from the base fit) and evaluates the refit statistics
// with the refit active set. Reuses a Gram cache across calls.
class ExactRefitOracle {
 public:
  ExactRefitOracle(const Matrix& design, const Vector& response, double lambda,
                   SolverOptions options = {});

  ExactUpdate evaluate(Index j, const Vector& new_column,
                       const Residualizer& residualizer,
                       const LassoFit* warm_start = nullptr);
  // Variant with an explicit centering column (must match the one used for the
  // approximate statistics).
  ExactUpdate evaluate_with_mu(Index j, const Vector& new_column,
                               const Vector& mu_col,
                               const LassoFit* warm_start = nullptr);

 private:
  LassoWorkspace workspace_;
  Vector original_column_;
  SolverOptions options_;
};

struct SignChanges {
  Index count = 0;
  IndexList indices;
};

SignChanges sign_change_count(const LassoFit& fit_a, const LassoFit& fit_b);

// Sum (approx - exact)^2 / sum exact^2 over the supplied pairs.
double normalized_update_error(const std::vector<std::pair<double, double>>& pairs);

}  // namespace lcu
