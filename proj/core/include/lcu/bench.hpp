#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcu/config.hpp"
#include "lcu/csv.hpp"
#include "lcu/gaussian.hpp"
#include "lcu/selection.hpp"
#include "lcu/types.hpp"

namespace lcu {

enum class DesignKind { ar1, equicorr, custom };

// One simulation cell: design law, coefficient law, noise, and procedure
// parameters. aspect() = n/p is derived.
struct SimScenario {
  Index n = 0;
  Index p = 0;
  Index s = 0;
  DesignKind design = DesignKind::ar1;
  double rho_ar = 0.0;    // ar1
  double a_p = 0.0;       // equicorr
  double eps_eq = 0.0;    // equicorr
  Matrix custom_sigma;    // custom
  CoefSpec coef = CoefSpec::gaussian_support;
  double amplitude = 0.0;       // fixed_amplitude uses amplitude / sqrt(n)
  double noise_variance = 1.0;  // per-entry v
  double lambda = 0.1;
  double q = 0.1;
  int crt_repetitions = 100;  // K
  std::uint64_t seed = 0;

  double aspect() const { return static_cast<double>(n) / static_cast<double>(p); }
  void validate() const;
};

GaussianDesignModel build_model(const SimScenario& scenario);

// --- update-error experiment grids -----------------------------------------

struct UpdateErrorOptions {
  std::vector<double> alpha_scales;  // n=800a, p=1000a, s=400a
  std::vector<double> rho_values;    // AR(1) grid; ignored for three-point
  bool three_point = false;
  std::vector<double> xi_values;  // three-point innovation parameter grid
  int reps = 1;                   // independent (A, Y, resample) replicates per cell
  double lambda = 0.2;
  std::uint64_t seed = 1;
};

struct UpdateErrorResult {
  std::vector<TableRow> rows;          // lasso-error / debiased-error per cell
  std::vector<PerCoordRow> percoord;   // scatter-figure dump
  int solver_failures = 0;
};

UpdateErrorResult run_update_error_experiment(const UpdateErrorOptions& options);

// --- FDR/power benchmark ---------------------------------------------------

struct MethodSpec {
  std::string name;  // one of: knockoff, knockoff-db, local-knockoff,
                     // local-knockoff-db, crt, crt-db
  Engine engine = Engine::approx;
  std::string label() const;
};

struct MethodSummary {
  std::string label;
  double fdr = 0.0;
  double power = 0.0;
  double fdr_stderr = 0.0;
  double power_stderr = 0.0;
  double seconds_per_rep = 0.0;
  std::uint64_t lasso_solves = 0;  // cumulative over all reps
  std::vector<double> fdp_per_rep;
  std::vector<double> power_per_rep;
};

struct FdrBenchResult {
  std::vector<TableRow> rows;
  std::vector<MethodSummary> summaries;
  int reps = 0;
  int dropped_reps = 0;
};

FdrBenchResult run_fdr_bench(const SimScenario& scenario,
                             const std::vector<MethodSpec>& methods, int reps,
                             std::uint64_t seed);

// --- knockoff-precision diagonal diagnostics -------------------------------

struct DiagKnockoffResult {
  std::vector<TableRow> rows;
};

// For each p: fraction of knockoff Schur-complement precision diagonals above
// p/10 for the singular equicorrelated precision E + perturb*I with s = 1/p,
// and above 1/10 for the a_p = 1/p scaling with the closed-form knockoff s.
DiagKnockoffResult diag_knockoff(const std::vector<Index>& p_grid, double eps_eq,
                                 double perturb);

// --- semi-real pipeline ----------------------------------------------------

// Greedy decorrelation: while any |corr| > cutoff, drop the member of the
// worst pair with the larger mean absolute correlation (ties -> larger index).
IndexList prune_correlated(const Matrix& data, double cutoff);

struct SemiRealOptions {
  double q = 0.1;
  std::vector<MethodSpec> methods;
  int reps = 20;
  std::uint64_t seed = 1;
  std::optional<Matrix> user_precision;
  double shrinkage_delta_factor = 0.1;  // delta_s = factor * mean diagonal
  std::vector<double> lambda_grid;      // CV grid; empty -> default grid
  int cv_folds = 5;
  int crt_repetitions = 100;
};

struct SemiRealResult {
  std::vector<TableRow> rows;
  IndexList truth;              // support of the CV-Lasso coefficients
  double cv_lambda = 0.0;
  double noise_estimate = 0.0;  // residual mean square of the CV fit
  std::vector<MethodSummary> summaries;
};

SemiRealResult semi_real_pipeline(const Matrix& design, const Vector& response,
                                  const SemiRealOptions& options);

// --- run manifest ----------------------------------------------------------

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit digest, hex-encoded.
std::string content_digest(const std::string& bytes);

struct RunManifest {
  std::string subcommand;
  std::uint64_t master_seed = 0;
  std::string tool_version = kToolVersion;
  Config config_snapshot;
  std::map<std::string, double> stage_seconds;
  std::map<std::string, std::string> output_digests;  // filename -> digest

  std::string to_json() const;
};

}  // namespace lcu
