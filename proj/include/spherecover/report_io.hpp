#pragma once

// CSV and JSON serialization of experiment results and reports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "spherecover/errors.hpp"
#include "spherecover/experiments.hpp"
#include "spherecover/oracles.hpp"
#include "spherecover/statistics.hpp"

namespace spherecover {

inline constexpr int kSchemaVersion = 1;

class IoError : public Error {
 public:
  using Error::Error;
};

/// 17 significant digits: enough to round-trip every double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or null for NaN/inf (JSON has no representation for them).
inline nlohmann::json json_number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

/*
 * Per-replication values. Columns are fixed:
 *
 *   # schema_version=1
 *   replication_index,v_value,evaluator_kind,mc_points
 */
inline void write_values_csv(std::ostream& out, const ExperimentResult& result) {
  out << "# schema_version=" << kSchemaVersion << '\n';
  out << "replication_index,v_value,evaluator_kind,mc_points\n";
  const std::string kind = to_string(result.plan.evaluator);
  const std::int64_t m = result.plan.effective_mc_points();
  for (std::size_t k = 0; k < result.values.size(); ++k) {
    out << k << ',' << format_double(result.values[k]) << ',' << kind << ',' << m << '\n';
  }
}

inline nlohmann::json to_json(const EmpiricalDistribution& e) {
  return {{"replications", e.size()},
          {"mean", json_number(e.mean)},
          {"variance", json_number(e.variance)},
          {"fourth_central_moment", json_number(e.fourth_central_moment)},
          {"min", json_number(e.sorted_values.front())},
          {"max", json_number(e.sorted_values.back())}};
}

inline nlohmann::json to_json(const CLTReport& r) {
  return {{"empirical_dK", json_number(r.empirical_dK)},
          {"dkw_radius", json_number(r.dkw_radius)},
          {"confidence", json_number(r.confidence)},
          {"standardization", to_string(r.standardization)},
          {"location", json_number(r.location)},
          {"scale", json_number(r.scale)},
          {"theoretical_bound", json_number(r.theoretical_bound)},
          {"mean_abs_error", json_number(r.mean_abs_error)},
          {"variance_ratio", json_number(r.variance_ratio)}};
}

inline nlohmann::json to_json(const BoundReport& b) {
  return {{"p_N", json_number(b.p_N)},
          {"p_N_bound", json_number(b.p_N_bound)},
          {"delta1_bound", json_number(b.delta1_bound)},
          {"delta2_bound", json_number(b.delta2_bound)},
          {"m4_bound", json_number(b.m4_bound)},
          {"m4_plugin", json_number(b.m4_plugin)},
          {"variance", json_number(b.variance)},
          {"variance_source", b.variance_source},
          {"shao_zhang_bound", json_number(b.shao_zhang_bound)},
          {"rate_bound", json_number(b.rate.fixed_dimension)},
          {"rate_bound_regime", json_number(b.rate.regime)},
          {"regime_exponent", json_number(b.rate.regime_exponent)},
          {"variance_lower", json_number(b.sandwich.lower)},
          {"variance_upper", json_number(b.sandwich.upper)}};
}

inline nlohmann::json to_json(const DeltaMoments& m) {
  return {{"trials", m.trials},
          {"delta1", json_number(m.delta1)},
          {"delta2", json_number(m.delta2)},
          {"m4", json_number(m.m4)},
          {"se_delta1", json_number(m.se_delta1)},
          {"se_delta2", json_number(m.se_delta2)},
          {"se_m4", json_number(m.se_m4)},
          {"max_abs_delta1", json_number(m.max_abs_delta1)}};
}

inline nlohmann::json to_json(const LedgerEntry& e) {
  return {{"id", e.id},
          {"claim", e.claim},
          {"value", json_number(e.value)},
          {"threshold", json_number(e.threshold)},
          {"status", to_string(e.status)},
          {"detail", e.detail}};
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return {{"all_passed", r.all_passed()},
          {"entries", std::move(entries)},
          {"bounds", to_json(r.bounds)},
          {"deltas", to_json(r.deltas)},
          {"clt", to_json(r.clt)},
          {"sample_mean", json_number(r.sample_mean)},
          {"sample_variance", json_number(r.sample_variance)}};
}

/// Writes `content` to `path` through a temporary file in the same directory
/// followed by a rename, so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write output file " + path.string());
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw IoError("write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move output into place at " + path.string() + ": " + ec.message());
  }
}

}  // namespace spherecover
