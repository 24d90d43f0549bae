#pragma once

// Command-line front end. Everything lives in run_cli() so tests can drive
// the exact code path of the executable in-process.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spherecover/errors.hpp"
#include "spherecover/experiments.hpp"
#include "spherecover/oracles.hpp"
#include "spherecover/report_io.hpp"
#include "spherecover/statistics.hpp"

namespace spherecover::cli {

inline constexpr const char* kThreadsEnv = "SPHERECOVER_THREADS";

enum ExitCode : int { kSuccess = 0, kValidationFailure = 1, kInternalError = 2 };

struct RunConfig {
  std::string subcommand;
  int d = 2;
  std::int64_t N = 100;
  std::int64_t R = 1000;
  std::int64_t M = 0;  // 0: 256 N
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0: $SPHERECOVER_THREADS, else hardware concurrency
  std::string evaluator = "auto";
  std::string standardization = "auto";
  double confidence = 0.95;
  double alpha = 0.25;
  double c1 = 0.25;
  double c2 = 0.75;
  double C1 = 1.5;
  std::int64_t lemma_trials = 10'000;
  std::int64_t delta_trials = 20'000;
  std::int64_t pair_trials = 100'000;
  int selectors = 4;
  std::string output;
  std::string report;
  std::string format = "csv";

  AbsoluteConstants constants() const { return {c1, c2, C1, alpha}; }

  void validate() const {
    if (d < 2) throw ParameterError("--d must be >= 2");
    if (N < 1) throw ParameterError("--N must be >= 1");
    if (R < 1) throw ParameterError("--R must be >= 1");
    if (M < 0) throw ParameterError("--M must be >= 0");
    if (format != "csv" && format != "json") throw ParameterError("--format must be csv or json");
    if (evaluator != "auto") parse_evaluator(evaluator);
    if (standardization != "auto") parse_standardization(standardization);
  }

  unsigned resolved_threads() const {
    if (threads > 0) return threads;
    if (const char* env = std::getenv(kThreadsEnv)) {
      try {
        const long v = std::stol(env);
        if (v > 0) return static_cast<unsigned>(v);
      } catch (const std::exception&) {
      }
    }
    return default_thread_count();
  }

  ExperimentPlan plan() const {
    ExperimentPlan p = ExperimentPlan::defaults(d, N, R, seed);
    if (evaluator != "auto") p.evaluator = parse_evaluator(evaluator);
    if (p.evaluator == EvaluatorKind::monte_carlo) p.mc_points = M > 0 ? M : default_mc_points(N);
    if (standardization != "auto") p.standardization = parse_standardization(standardization);
    p.threads = resolved_threads();
    p.validate();
    return p;
  }

  // Everything that determines the numbers (threads and paths excluded).
  nlohmann::json to_json() const {
    return {{"d", d}, {"N", N}, {"R", R}, {"M", M}, {"seed", seed},
            {"evaluator", evaluator}, {"standardization", standardization},
            {"confidence", confidence}, {"alpha", alpha}, {"c1", c1}, {"c2", c2},
            {"C1", C1}, {"lemma_trials", lemma_trials}, {"delta_trials", delta_trials},
            {"pair_trials", pair_trials}, {"selectors", selectors}};
  }

  static RunConfig from_json(const std::string& subcommand, const nlohmann::json& j) {
    RunConfig c;
    c.subcommand = subcommand;
    c.d = j.at("d").get<int>();
    c.N = j.at("N").get<std::int64_t>();
    c.R = j.at("R").get<std::int64_t>();
    c.M = j.at("M").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.evaluator = j.at("evaluator").get<std::string>();
    c.standardization = j.at("standardization").get<std::string>();
    c.confidence = j.at("confidence").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.c1 = j.at("c1").get<double>();
    c.c2 = j.at("c2").get<double>();
    c.C1 = j.at("C1").get<double>();
    c.lemma_trials = j.at("lemma_trials").get<std::int64_t>();
    c.delta_trials = j.at("delta_trials").get<std::int64_t>();
    c.pair_trials = j.at("pair_trials").get<std::int64_t>();
    c.selectors = j.at("selectors").get<int>();
    return c;
  }
};

/// Result of one command: a JSON document plus optional value data.
struct CommandOutput {
  nlohmann::json document;
  std::optional<ExperimentResult> experiment;
  std::string summary;
  bool ledger_failed = false;
};

namespace detail {

inline nlohmann::json moments_json(const ExperimentResult& r) {
  auto j = to_json(r.distribution);
  const auto dn = r.denoised_variance();
  j["denoised_variance"] = json_number(dn.value);
  j["denoise_floored"] = dn.floored;
  j["evaluator"] = to_string(r.plan.evaluator);
  j["mc_points"] = r.plan.effective_mc_points();
  return j;
}

inline std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

inline std::string head(const RunConfig& c) {
  return c.subcommand + " d=" + std::to_string(c.d) + " N=" + std::to_string(c.N);
}

inline CommandOutput run_simulate(const RunConfig& c) {
  CommandOutput out;
  auto result = run_replications(c.plan());
  out.document["results"] = moments_json(result);
  out.document["timings"] = {{"seconds", result.seconds}};
  out.summary = head(c) + " R=" + std::to_string(c.R) +
                " mean=" + fmt(result.distribution.mean) +
                " variance=" + fmt(result.distribution.variance) +
                " evaluator=" + to_string(result.plan.evaluator);
  out.experiment = std::move(result);
  return out;
}

inline CommandOutput run_clt(const RunConfig& c) {
  CommandOutput out;
  const auto plan = c.plan();
  auto result = run_replications(plan);
  const auto report = analyze_clt(result, plan.standardization, c.confidence);
  auto results = moments_json(result);
  results["clt"] = to_json(report);
  out.document["results"] = std::move(results);
  out.document["timings"] = {{"seconds", result.seconds}};
  out.summary = head(c) + " R=" + std::to_string(c.R) +
                " mean=" + fmt(result.distribution.mean) +
                " variance=" + fmt(result.distribution.variance) +
                " dK=" + fmt(report.empirical_dK) + " dkw=" + fmt(report.dkw_radius) +
                " bound=" + fmt(report.theoretical_bound);
  out.experiment = std::move(result);
  return out;
}

inline CommandOutput run_mean_variance(const RunConfig& c) {
  CommandOutput out;
  auto result = run_replications(c.plan());
  auto results = moments_json(result);
  const double mean_oracle = exact_mean(c.N);
  results["exact_mean"] = json_number(mean_oracle);
  results["mean_abs_error"] = json_number(std::abs(result.distribution.mean - mean_oracle));
  results["mean_standard_error"] = json_number(result.distribution.standard_error());
  const auto var_oracle = oracle_variance(result.plan.params);
  results["exact_variance"] = var_oracle ? json_number(*var_oracle) : nlohmann::json(nullptr);
  out.document["results"] = std::move(results);
  out.document["timings"] = {{"seconds", result.seconds}};
  out.summary = head(c) + " R=" + std::to_string(c.R) +
                " mean=" + fmt(result.distribution.mean) + " exact_mean=" + fmt(mean_oracle) +
                " variance=" + fmt(result.denoised_variance().value) +
                (var_oracle ? " exact_variance=" + fmt(*var_oracle) : std::string());
  out.experiment = std::move(result);
  return out;
}

inline CommandOutput run_bounds(const RunConfig& c) {
  CommandOutput out;
  const auto params = ModelParams::make(c.d, c.N);
  const auto k = c.constants();
  const auto b = bound_report(params, k);
  auto results = to_json(b);
  results["radius"] = json_number(params.radius);
  results["admissible_dimension"] = admissible_dimension(c.N, c.alpha);
  results["alpha_limit"] = json_number(k.alpha_limit());
  results["alpha_admissible"] = k.alpha_admissible();
  out.document["results"] = std::move(results);
  out.document["timings"] = {{"seconds", 0.0}};
  out.summary = head(c) + " p_N=" + fmt(b.p_N) + " p_N_bound=" + fmt(b.p_N_bound) +
                " shao_zhang=" + fmt(b.shao_zhang_bound) + " rate=" + fmt(b.rate.fixed_dimension);
  return out;
}

inline CommandOutput run_verify(const RunConfig& c) {
  CommandOutput out;
  const auto params = ModelParams::make(c.d, c.N);
  VerificationBudget budget;
  budget.lemma_trials = c.lemma_trials;
  budget.delta_trials = c.delta_trials;
  budget.replications = c.R;
  budget.pair_trials = c.pair_trials;
  budget.random_selectors = c.selectors;
  budget.mc_points = c.M;
  const auto start = std::chrono::steady_clock::now();
  const auto report = verify_all(params, c.constants(), budget, c.seed, c.resolved_threads());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.document["results"] = to_json(report);
  out.document["timings"] = {{"seconds", seconds}};
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;
  for (const auto& e : report.entries) {
    if (e.status == CheckStatus::pass) ++passed;
    else if (e.status == CheckStatus::fail) ++failed;
    else ++skipped;
  }
  out.ledger_failed = failed > 0;
  out.summary = head(c) + " passed=" + std::to_string(passed) +
                " failed=" + std::to_string(failed) + " skipped=" + std::to_string(skipped) +
                " dK=" + fmt(report.clt.empirical_dK) +
                " bound=" + fmt(report.clt.theoretical_bound);
  return out;
}

inline CommandOutput execute(const RunConfig& c) {
  c.validate();
  CommandOutput out;
  if (c.subcommand == "simulate") out = run_simulate(c);
  else if (c.subcommand == "clt") out = run_clt(c);
  else if (c.subcommand == "mean-variance") out = run_mean_variance(c);
  else if (c.subcommand == "bounds") out = run_bounds(c);
  else if (c.subcommand == "verify-lemmas") out = run_verify(c);
  else throw ParameterError("unknown subcommand '" + c.subcommand + "'");
  out.document["schema_version"] = kSchemaVersion;
  out.document["command"] = c.subcommand;
  out.document["config"] = c.to_json();
  return out;
}

inline void write_outputs(const RunConfig& c, const CommandOutput& out) {
  const bool has_values = out.experiment && (c.subcommand == "simulate" || c.subcommand == "clt");
  std::string report_path = c.report;
  if (has_values) {
    if (!c.output.empty()) {
      if (c.format == "csv") {
        std::ostringstream csv;
        write_values_csv(csv, *out.experiment);
        atomic_write(c.output, csv.str());
      } else {
        auto doc = out.document;
        doc["values"] = out.experiment->values;
        atomic_write(c.output, doc.dump(2) + "\n");
      }
      if (report_path.empty() && c.subcommand == "clt") report_path = c.output + ".report.json";
    }
  } else if (!c.output.empty()) {
    atomic_write(c.output, out.document.dump(2) + "\n");
  }
  if (!report_path.empty()) atomic_write(report_path, out.document.dump(2) + "\n");
}

inline void add_options(CLI::App& sub, RunConfig& c, bool experiment, bool constants,
                        bool verify) {
  sub.add_option("--d", c.d, "ambient dimension (sphere S^{d-1}), >= 2")->capture_default_str();
  sub.add_option("--N", c.N, "number of caps, each of measure 1/N")->capture_default_str();
  sub.add_option("--seed", c.seed, "64-bit base seed")->capture_default_str();
  if (experiment || verify) {
    sub.add_option("--R", c.R, "number of replications")->capture_default_str();
    sub.add_option("--M", c.M, "Monte Carlo points per evaluation (0: 256 N)")
        ->capture_default_str();
    sub.add_option("--threads", c.threads,
                   "worker threads (0: $SPHERECOVER_THREADS or all cores)")
        ->capture_default_str();
  }
  if (experiment) {
    sub.add_option("--evaluator", c.evaluator, "auto | exact | mc")->capture_default_str();
    sub.add_option("--standardization", c.standardization,
                   "auto | oracle-moments | sample-moments | identity")
        ->capture_default_str();
    sub.add_option("--confidence", c.confidence, "DKW confidence level")->capture_default_str();
    sub.add_option("--format", c.format, "values output format: csv | json")
        ->capture_default_str();
  }
  if (constants || verify) {
    sub.add_option("--alpha", c.alpha, "dimension growth rate, d <= alpha ln N")
        ->capture_default_str();
    sub.add_option("--c1", c.c1, "variance lower-bound constant in (0,1)")->capture_default_str();
    sub.add_option("--c2", c.c2, "variance upper-bound constant in (0,1)")->capture_default_str();
    sub.add_option("--C1", c.C1, "variance lower-bound exponent in (1,2)")->capture_default_str();
  }
  if (verify) {
    sub.add_option("--lemma-trials", c.lemma_trials, "random schemes per lemma suite")
        ->capture_default_str();
    sub.add_option("--delta-trials", c.delta_trials, "trials for the delta estimators")
        ->capture_default_str();
    sub.add_option("--pair-trials", c.pair_trials, "random cap pairs for the p_N check")
        ->capture_default_str();
    sub.add_option("--selectors", c.selectors, "random recombinations for the sup estimate")
        ->capture_default_str();
  }
  sub.add_option("--output", c.output, "output path (written atomically)")->capture_default_str();
  sub.add_option("--report", c.report, "JSON report path")->capture_default_str();
}

struct Parser {
  CLI::App app{"Union of random caps on the sphere: simulation and bound checks",
               "spherecover"};
  RunConfig config;
  std::string replay;

  Parser() {
    app.require_subcommand(0, 1);
    app.add_option("--replay", replay,
                   "re-run the command recorded in a JSON report and compare results")
        ->capture_default_str();
    add_options(*app.add_subcommand("simulate", "simulate R realizations of V_N"), config,
                true, false, false);
    add_options(*app.add_subcommand("clt", "Kolmogorov distance of standardized V_N to N(0,1)"),
                config, true, false, false);
    add_options(*app.add_subcommand("mean-variance", "compare sample moments with the oracles"),
                config, true, false, false);
    add_options(*app.add_subcommand("bounds", "evaluate p_N, delta and rate bounds"), config,
                false, true, false);
    add_options(*app.add_subcommand("verify-lemmas", "run every verification check"), config,
                false, true, true);
  }

  std::string selected() const {
    for (const auto* sub : app.get_subcommands()) return sub->get_name();
    return {};
  }
};

inline int run_replay(const std::string& path, std::ostream& out, std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read replay file " + path);
  const auto recorded = nlohmann::json::parse(in);
  auto config = RunConfig::from_json(recorded.at("command").get<std::string>(),
                                     recorded.at("config"));
  const auto fresh = execute(config);
  if (fresh.document.at("results") == recorded.at("results")) {
    out << "replay ok: " << config.subcommand << " results reproduced exactly\n";
    return kSuccess;
  }
  err << "replay mismatch: " << config.subcommand << " results differ from " << path << "\n";
  return kValidationFailure;
}

}  // namespace detail

/// Full help text (all subcommands).
inline std::string help_text() {
  detail::Parser p;
  return p.app.help("", CLI::AppFormatMode::All);
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  detail::Parser p;
  try {
    p.app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << p.app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << p.app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }

  try {
    if (!p.replay.empty()) return detail::run_replay(p.replay, out, err);
    p.config.subcommand = p.selected();
    if (p.config.subcommand.empty()) {
      err << "error: a subcommand is required\n" << p.app.help();
      return kValidationFailure;
    }
    const auto result = detail::execute(p.config);
    detail::write_outputs(p.config, result);
    out << result.summary << "\n";
    return result.ledger_failed ? kValidationFailure : kSuccess;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed report: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace spherecover::cli
