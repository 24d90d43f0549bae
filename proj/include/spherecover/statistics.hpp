#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "spherecover/errors.hpp"

namespace spherecover {

/// Sample law of R replicated values.
struct EmpiricalDistribution {
  std::vector<double> sorted_values;
  double mean = 0.0;
  double variance = 0.0;  // unbiased; 0 when R = 1
  double fourth_central_moment = 0.0;

  /// Moments are accumulated in the given order, so equal input sequences
  /// give bit-identical results.
  static EmpiricalDistribution from_values(std::vector<double> values) {
    if (values.empty()) throw ParameterError("empirical distribution needs R >= 1");
    EmpiricalDistribution e;
    const double r = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / r;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : values) {
      const double c = v - e.mean;
      const double c2 = c * c;
      m2 += c2;
      m4 += c2 * c2;
    }
    e.variance = values.size() > 1 ? m2 / (r - 1.0) : 0.0;
    e.fourth_central_moment = m4 / r;
    std::sort(values.begin(), values.end());
    e.sorted_values = std::move(values);
    return e;
  }

  std::int64_t size() const noexcept {
    return static_cast<std::int64_t>(sorted_values.size());
  }
  double standard_error() const { return std::sqrt(variance / static_cast<double>(size())); }
};

/// Φ(x) = erfc(-x/√2)/2.
inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Dvoretzky–Kiefer–Wolfowitz half-width √(ln(2/δ) / 2R) at confidence 1-δ.
inline double dkw_radius(std::int64_t R, double confidence = 0.95) {
  if (R < 1) throw ParameterError("DKW radius needs R >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw ParameterError("confidence must lie in (0, 1)");
  }
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(R)));
}

enum class Standardization { identity, oracle_moments, sample_moments };

inline std::string to_string(Standardization s) {
  switch (s) {
    case Standardization::identity: return "identity";
    case Standardization::oracle_moments: return "oracle-moments";
    case Standardization::sample_moments: return "sample-moments";
  }
  return "unknown";
}

inline Standardization parse_standardization(const std::string& s) {
  if (s == "identity") return Standardization::identity;
  if (s == "oracle-moments" || s == "oracle") return Standardization::oracle_moments;
  if (s == "sample-moments" || s == "sample") return Standardization::sample_moments;
  throw ParameterError("unknown standardization '" + s + "'");
}

struct CLTReport {
  double empirical_dK = 0.0;
  double dkw_radius = 0.0;
  double confidence = 0.95;
  Standardization standardization = Standardization::sample_moments;
  double location = 0.0;  // μ used for w = (v - μ)/s
  double scale = 1.0;     // s
  double theoretical_bound = std::numeric_limits<double>::quiet_NaN();
  double mean_abs_error = std::numeric_limits<double>::quiet_NaN();
  double variance_ratio = std::numeric_limits<double>::quiet_NaN();
};

/*
 * Kolmogorov distance between the standardized sample and N(0, 1):
 *
 *   d_K = max_k max(k/R - Φ(w_(k)), Φ(w_(k)) - (k-1)/R)
 *
 * over the order statistics w_(k). Only the d_K, DKW and standardization
 * fields of the report are filled here.
 */
inline CLTReport kolmogorov_distance(const EmpiricalDistribution& dist,
                                     Standardization mode,
                                     std::optional<double> oracle_mean = std::nullopt,
                                     std::optional<double> oracle_variance = std::nullopt,
                                     double confidence = 0.95) {
  CLTReport report;
  report.standardization = mode;
  report.confidence = confidence;
  const std::int64_t R = dist.size();
  if (R < 1) throw ParameterError("Kolmogorov distance needs R >= 1");

  switch (mode) {
    case Standardization::identity:
      break;
    case Standardization::oracle_moments:
      if (!oracle_mean || !oracle_variance) {
        throw ParameterError("oracle-moments standardization needs oracle mean and variance");
      }
      if (!(*oracle_variance > 0.0)) {
        throw DegenerateDistribution("oracle variance is not positive");
      }
      report.location = *oracle_mean;
      report.scale = std::sqrt(*oracle_variance);
      break;
    case Standardization::sample_moments:
      if (R < 2) throw ParameterError("sample-moments standardization needs R >= 2");
      if (!(dist.variance > 0.0) || dist.sorted_values.front() == dist.sorted_values.back()) {
        throw DegenerateDistribution("sample variance is zero");
      }
      report.location = dist.mean;
      report.scale = std::sqrt(dist.variance);
      break;
  }

  const double r = static_cast<double>(R);
  double dk = 0.0;
  for (std::int64_t k = 0; k < R; ++k) {
    const double w = (dist.sorted_values[static_cast<std::size_t>(k)] - report.location) /
                     report.scale;
    const double phi = standard_normal_cdf(w);
    dk = std::max({dk, static_cast<double>(k + 1) / r - phi, phi - static_cast<double>(k) / r});
  }
  report.empirical_dK = std::clamp(dk, 0.0, 1.0);
  report.dkw_radius = dkw_radius(R, confidence);
  return report;
}

struct DenoisedVariance {
  double value = 0.0;
  bool floored = false;
};

/// Removes the conditional Monte Carlo noise mean(1-mean)/M from a variance
/// estimate, floored at 0. M = 0 marks an exact evaluator (no correction).
inline DenoisedVariance variance_denoise(double raw_variance, double mean, std::int64_t M) {
  if (M < 0) throw ParameterError("Monte Carlo sample count must be >= 0");
  if (M == 0) return {raw_variance, false};
  const double corrected = raw_variance - mean * (1.0 - mean) / static_cast<double>(M);
  if (corrected < 0.0) return {0.0, true};
  return {corrected, false};
}

}  // namespace spherecover
