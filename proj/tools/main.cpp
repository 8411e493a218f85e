// lcu: generalized debiased Lasso toolkit and benchmark harness.
//
// Subcommands: gen, fit, debias, update-error, fdr-bench, diag-knockoff,
// semi-real. Every run writes its outputs plus a manifest.json (config
// snapshot, seed, per-stage wall clock, output digests) under --out.
// Exit codes: 0 success, 1 validation/configuration error, 2 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "CLI11.hpp"

#include "lcu/bench.hpp"
#include "lcu/config.hpp"
#include "lcu/csv.hpp"
#include "lcu/debias.hpp"
#include "lcu/gaussian.hpp"
#include "lcu/lasso.hpp"
#include "lcu/selection.hpp"

namespace {

using namespace lcu;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  bool seed_set = false;
  std::string out = ".";
  int threads = 0;
  std::string engine = "approx";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value config file");
  cmd->add_option("--seed", args.seed, "master seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--threads", args.threads, "worker threads (0 = env/default)");
  cmd->add_option("--engine", args.engine, "approx or exact")
      ->check(CLI::IsMember({"approx", "exact"}));
}

Config load_config(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) {
    try {
      cfg = Config::FromFile(args.config_path);
    } catch (const std::runtime_error& e) {
      throw ValidationError(e.what());
    }
  }
  return cfg;
}

void apply_threads(const CommonArgs& args) {
  int threads = args.threads;
  if (threads <= 0) {
    if (const char* env = std::getenv("LCU_THREADS")) threads = std::atoi(env);
  }
  if (threads > 0) Eigen::setNbThreads(threads);
}

std::uint64_t effective_seed(const CommonArgs& args, const Config& cfg,
                             const std::string& key) {
  if (args.seed_set) return args.seed;
  return cfg.get_u64(key, args.seed);
}

std::vector<double> parse_double_list(const std::string& text,
                                      const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse '" + tok + "' as a number");
    }
  }
  return out;
}

std::vector<std::string> parse_string_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

Engine parse_engine(const std::string& s) {
  return s == "exact" ? Engine::exact : Engine::approx;
}

std::vector<MethodSpec> parse_methods(const Config& cfg, const std::string& key,
                                      const std::string& fallback, Engine engine) {
  std::vector<MethodSpec> methods;
  for (const std::string& name :
       parse_string_list(cfg.get_string(key, fallback)))
    methods.push_back({name, engine});
  if (methods.empty()) throw ValidationError("no methods configured");
  return methods;
}

SimScenario scenario_from_config(const Config& cfg, std::uint64_t seed) {
  SimScenario s;
  s.n = cfg.get_int("scenario.n", 200);
  s.p = cfg.get_int("scenario.p", 300);
  s.s = cfg.get_int("scenario.s", 20);
  const std::string design = cfg.get_string("scenario.design", "equicorr");
  if (design == "ar1")
    s.design = DesignKind::ar1;
  else if (design == "equicorr")
    s.design = DesignKind::equicorr;
  else
    throw ValidationError("scenario.design must be ar1 or equicorr");
  s.rho_ar = cfg.get_double("scenario.rho", 0.5);
  s.a_p = cfg.get_double("scenario.a_p", 1.0 / static_cast<double>(s.p));
  s.eps_eq = cfg.get_double("scenario.eps_eq", 50.0);
  const std::string coef = cfg.get_string("scenario.coef", "fixed");
  if (coef == "gaussian")
    s.coef = CoefSpec::gaussian_support;
  else if (coef == "fixed")
    s.coef = CoefSpec::fixed_amplitude;
  else
    throw ValidationError("scenario.coef must be gaussian or fixed");
  s.amplitude = cfg.get_double("scenario.amplitude", 0.5);
  s.noise_variance = cfg.get_double("scenario.noise_variance",
                                    1.0 / static_cast<double>(s.p));
  s.lambda = cfg.get_double("scenario.lambda", 0.01);
  s.q = cfg.get_double("scenario.q", 0.1);
  s.crt_repetitions = static_cast<int>(cfg.get_int("scenario.K", 200));
  s.seed = seed;
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return s;
}

// Writes a file under out/ and records its digest in the manifest.
struct OutputWriter {
  std::filesystem::path dir;
  RunManifest* manifest;
  void write(const std::string& name, const std::string& content) const {
    write_text_file((dir / name).string(), content);
    manifest->output_digests[name] = content_digest(content);
  }
};

struct StageTimer {
  RunManifest* manifest;
  std::string stage;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  ~StageTimer() {
    manifest->stage_seconds[stage] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  }
};

std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string vector_csv(const Vector& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) out += format_double(v[i]) + "\n";
  return out;
}

Matrix load_matrix(const std::string& path) {
  try {
    return ingest_csv(path, false, false).values;
  } catch (const std::runtime_error& e) {
    throw ValidationError(e.what());
  }
}

int finish(const CommonArgs& args, RunManifest& manifest) {
  OutputWriter w{args.out, &manifest};
  write_text_file((w.dir / "manifest.json").string(), manifest.to_json());
  return 0;
}

int cmd_gen(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  const std::uint64_t seed = effective_seed(args, cfg, "scenario.seed");
  const SimScenario scenario = scenario_from_config(cfg, seed);
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "gen";
  manifest.master_seed = seed;
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "generate"};
    const GaussianDesignModel model = build_model(scenario);
    const Rng master(seed);
    Rng rng_a = master.substream("design");
    const Matrix A = sample_design(scenario.n, model, rng_a);
    Rng rng_c = master.substream("coef");
    const double amp =
        scenario.coef == CoefSpec::fixed_amplitude
            ? scenario.amplitude / std::sqrt(static_cast<double>(scenario.n))
            : 0.0;
    const SparseCoefficients coef =
        sparse_coefficients(scenario.p, scenario.s, scenario.coef, amp, rng_c);
    Rng rng_w = master.substream("noise");
    const Vector Y =
        generate_response(A, coef.values, scenario.noise_variance, rng_w);
    w.write("design.csv", matrix_csv(A));
    w.write("response.csv", vector_csv(Y));
    w.write("coefficients.csv", vector_csv(coef.values));
  }
  return finish(args, manifest);
}

int cmd_fit(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  const std::string design_path = cfg.get_string("fit.design", "design.csv");
  const std::string response_path = cfg.get_string("fit.response", "response.csv");
  const double lambda = cfg.get_double("fit.lambda", 0.1);
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "fit";
  manifest.master_seed = effective_seed(args, cfg, "fit.seed");
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "fit"};
    const Matrix A = load_matrix(design_path);
    const Vector Y = load_matrix(response_path).col(0);
    const LassoFit fit = solve_lasso({A, Y, lambda});
    w.write("coefficients.csv", vector_csv(fit.coefficients));
    std::vector<TableRow> rows;
    rows.push_back({"fit", lambda, 0.0, "k", static_cast<double>(fit.k), 1, 0.0});
    rows.push_back({"fit", lambda, 0.0, "objective", fit.objective, 1, 0.0});
    rows.push_back({"fit", lambda, 0.0, "kkt-gap", fit.kkt_gap, 1, 0.0});
    rows.push_back(
        {"fit", lambda, 0.0, "iterations", static_cast<double>(fit.iterations), 1, 0.0});
    w.write("table.csv", serialize_table(rows));
  }
  return finish(args, manifest);
}

int cmd_debias(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  const std::string design_path = cfg.get_string("debias.design", "design.csv");
  const std::string response_path =
      cfg.get_string("debias.response", "response.csv");
  const std::string precision_path = cfg.get_string("debias.precision", "");
  const double lambda = cfg.get_double("debias.lambda", 0.1);
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "debias";
  manifest.master_seed = effective_seed(args, cfg, "debias.seed");
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "debias"};
    const Matrix A = load_matrix(design_path);
    const Vector Y = load_matrix(response_path).col(0);
    const Residualizer residualizer =
        precision_path.empty()
            ? Residualizer::OlsProjection()
            : Residualizer::GaussianConditional(load_matrix(precision_path));
    const LassoFit fit = solve_lasso({A, Y, lambda});
    const DebiasResult res = debias_generalized(A, Y, fit, residualizer);
    std::vector<PerCoordRow> rows;
    for (Index j = 0; j < res.alpha_u.size(); ++j)
      rows.push_back({j, "debiased", res.alpha_u[j], fit.coefficients[j],
                      res.denominators[j]});
    w.write("percoord.csv", serialize_percoord(rows));
  }
  return finish(args, manifest);
}

int cmd_update_error(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  UpdateErrorOptions opt;
  opt.alpha_scales =
      parse_double_list(cfg.get_string("update-error.alpha_scales", "1.0"),
                        "update-error.alpha_scales");
  opt.rho_values = parse_double_list(
      cfg.get_string("update-error.rho_values", "0.95"), "update-error.rho_values");
  opt.three_point = cfg.get_bool("update-error.three_point", false);
  opt.xi_values = parse_double_list(
      cfg.get_string("update-error.xi_values", "0.5"), "update-error.xi_values");
  opt.reps = static_cast<int>(cfg.get_int("update-error.reps", 1));
  opt.lambda = cfg.get_double("update-error.lambda", 0.2);
  opt.seed = effective_seed(args, cfg, "update-error.seed");
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "update-error";
  manifest.master_seed = opt.seed;
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "update-error"};
    UpdateErrorResult res;
    try {
      res = run_update_error_experiment(opt);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    w.write("table.csv", serialize_table(res.rows));
    w.write("percoord.csv", serialize_percoord(res.percoord));
    if (res.solver_failures > 0)
      std::cerr << "update-error: " << res.solver_failures
                << " per-coordinate solver failures (skipped)\n";
  }
  return finish(args, manifest);
}

int cmd_fdr_bench(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  const std::uint64_t seed = effective_seed(args, cfg, "fdr-bench.seed");
  const SimScenario scenario = scenario_from_config(cfg, seed);
  const std::vector<MethodSpec> methods = parse_methods(
      cfg, "fdr-bench.methods", "local-knockoff-db,crt-db",
      parse_engine(args.engine));
  const int reps = static_cast<int>(cfg.get_int("fdr-bench.reps", 20));
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "fdr-bench";
  manifest.master_seed = seed;
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "fdr-bench"};
    FdrBenchResult res;
    try {
      res = run_fdr_bench(scenario, methods, reps, seed);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    w.write("table.csv", serialize_table(res.rows));
    if (res.dropped_reps > 0)
      std::cerr << "fdr-bench: " << res.dropped_reps << " replicates dropped\n";
  }
  return finish(args, manifest);
}

int cmd_diag_knockoff(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  std::vector<Index> p_grid;
  for (double v : parse_double_list(
           cfg.get_string("diag-knockoff.p_grid", "50,200"), "diag-knockoff.p_grid"))
    p_grid.push_back(static_cast<Index>(v));
  const double eps_eq = cfg.get_double("diag-knockoff.eps_eq", 1e-6);
  const double perturb = cfg.get_double("diag-knockoff.perturb", 1e-6);
  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "diag-knockoff";
  manifest.master_seed = effective_seed(args, cfg, "diag-knockoff.seed");
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "diag-knockoff"};
    const DiagKnockoffResult res = diag_knockoff(p_grid, eps_eq, perturb);
    w.write("table.csv", serialize_table(res.rows));
  }
  return finish(args, manifest);
}

int cmd_semi_real(const CommonArgs& args) {
  apply_threads(args);
  Config cfg = load_config(args);
  const std::string data_path = cfg.get_string("semi-real.data", "");
  if (data_path.empty())
    throw ValidationError("semi-real.data (CSV path) is required");
  const bool has_header = cfg.get_bool("semi-real.has_header", false);
  const bool standardize = cfg.get_bool("semi-real.standardize", true);
  const double prune_cutoff = cfg.get_double("semi-real.prune_cutoff", 0.0);

  SemiRealOptions opt;
  opt.q = cfg.get_double("semi-real.q", 0.1);
  opt.methods = parse_methods(cfg, "semi-real.methods", "crt-db",
                              parse_engine(args.engine));
  opt.reps = static_cast<int>(cfg.get_int("semi-real.reps", 20));
  opt.seed = effective_seed(args, cfg, "semi-real.seed");
  opt.shrinkage_delta_factor = cfg.get_double("semi-real.delta_factor", 0.1);
  opt.cv_folds = static_cast<int>(cfg.get_int("semi-real.cv_folds", 5));
  opt.crt_repetitions = static_cast<int>(cfg.get_int("semi-real.K", 100));
  const std::string precision_path = cfg.get_string("semi-real.precision", "");
  if (!precision_path.empty()) opt.user_precision = load_matrix(precision_path);

  std::filesystem::create_directories(args.out);
  RunManifest manifest;
  manifest.subcommand = "semi-real";
  manifest.master_seed = opt.seed;
  manifest.config_snapshot = cfg;
  OutputWriter w{args.out, &manifest};
  {
    StageTimer t{&manifest, "semi-real"};
    CsvData data;
    try {
      data = ingest_csv(data_path, has_header, standardize);
    } catch (const std::runtime_error& e) {
      throw ValidationError(e.what());
    }
    // Last column is the response; the rest is the design.
    const Index p_all = data.values.cols();
    if (p_all < 3) throw ValidationError("semi-real: need >= 2 features + response");
    Matrix design = data.values.leftCols(p_all - 1);
    const Vector response = data.values.col(p_all - 1);
    if (prune_cutoff > 0.0) {
      const IndexList kept = prune_correlated(design, prune_cutoff);
      Matrix pruned(design.rows(), static_cast<Index>(kept.size()));
      for (std::size_t i = 0; i < kept.size(); ++i)
        pruned.col(static_cast<Index>(i)) = design.col(kept[i]);
      design = std::move(pruned);
    }
    SemiRealResult res;
    try {
      res = semi_real_pipeline(design, response, opt);
    } catch (const std::invalid_argument& e) {
      throw ValidationError(e.what());
    }
    w.write("table.csv", serialize_table(res.rows));
  }
  return finish(args, manifest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized debiased Lasso toolkit"};
  app.require_subcommand(1);

  struct SubDef {
    const char* name;
    const char* desc;
    int (*run)(const CommonArgs&);
  };
  const std::vector<SubDef> subs = {
      {"gen", "generate a synthetic scenario (design/response/coefficients)", cmd_gen},
      {"fit", "solve one Lasso problem from CSV inputs", cmd_fit},
      {"debias", "fit and compute generalized debiased coefficients", cmd_debias},
      {"update-error", "one-column update approximation error grids", cmd_update_error},
      {"fdr-bench", "FDR/power benchmark across selection methods", cmd_fdr_bench},
      {"diag-knockoff", "knockoff-precision diagonal diagnostics", cmd_diag_knockoff},
      {"semi-real", "semi-synthetic pipeline on a real CSV", cmd_semi_real},
  };

  std::vector<CommonArgs> args(subs.size());
  std::vector<std::pair<CLI::App*, const SubDef*>> wired;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].desc);
    add_common(cmd, args[i]);
    wired.emplace_back(cmd, &subs[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < wired.size(); ++i) {
    if (!wired[i].first->parsed()) continue;
    try {
      return wired[i].second->run(args[i]);
    } catch (const ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "numerical failure: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}
