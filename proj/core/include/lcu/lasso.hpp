#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lcu/types.hpp"

namespace lcu {

// l1-penalized least squares with the 1/(2n) loss scaling:
//   minimize (1/2n) ||Y - A a||^2 + lambda ||a||_1
struct LassoProblem {
  Matrix design;
  Vector response;
  double lambda_reg = 0.0;

  void validate() const;
};

struct SolverOptions {
  double kkt_tol = 1e-8;
  // |psi_j| >= 1 - sign_tol declares the coordinate essentially active.
  double sign_tol = 1e-6;
  int max_sweeps = 200000;
  std::optional<Vector> warm_start;
};

// Solution bundle. The subgradient psi = A^T R / (n lambda) is recomputed from
// the final residual, so it reconstructs exactly from (A, R, lambda).
struct LassoFit {
  Vector coefficients;
  Vector residual;      // Y - A a
  Vector subgradient;   // psi
  std::vector<int> signs;  // chi in {-1,0,+1}
  IndexList active_set;    // {l : chi_l != 0}
  Index k = 0;             // |active_set|
  double objective = 0.0;
  double kkt_gap = 0.0;
  int iterations = 0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& msg, LassoFit best)
      : std::runtime_error(msg), best_iterate(std::move(best)) {}
  LassoFit best_iterate;
};

double soft_threshold(double x, double t);

LassoFit solve_lasso(const LassoProblem& problem, const SolverOptions& options = {});

// Gram-caching workspace for repeated solves of problems differing in one
// column. Owns a mutable copy of the design.
class LassoWorkspace {
 public:
  LassoWorkspace(const Matrix& design, const Vector& response, double lambda);

  // Overwrite column j (updates the cached Gram row/column in O(np)).
  void set_column(Index j, const Vector& col);
  const Matrix& design() const { return design_; }
  const Vector& response() const { return response_; }
  double lambda() const { return lambda_; }

  LassoFit solve(const SolverOptions& options = {}) const;

 private:
  Matrix design_;
  Vector response_;
  double lambda_;
  Matrix gram_;   // (1/n) A^T A
  Vector corr_;   // (1/n) A^T Y
  double yty_;    // (1/n) Y^T Y
};

struct KktDiagnostics {
  double max_psi_excess = 0.0;       // (||psi||_inf - 1)_+
  double max_sign_violation = 0.0;   // max over active set of |psi_j - sign(a_j)|
  double psi_drift = 0.0;            // || stored psi - recomputed psi ||_inf
};

KktDiagnostics kkt_report(const LassoProblem& problem, const LassoFit& fit);

struct CvResult {
  double best_lambda = 0.0;
  std::vector<double> lambda_grid;
  std::vector<double> cv_errors;  // mean held-out squared error per lambda
};

CvResult cross_validate_lambda(const Matrix& design, const Vector& response,
                               const std::vector<double>& lambda_grid, int folds,
                               std::uint64_t seed);

// Process-wide count of Lasso solves, used by the benchmark harness to verify
// complexity accounting for approximate vs exact selection engines.
std::uint64_t lasso_solve_count();
void reset_lasso_solve_count();

}  // namespace lcu
