#pragma once

// Replication driver, Monte Carlo estimators of the Berry–Esseen ingredients
// and the lemma verification suites.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spherecover/coverage.hpp"
#include "spherecover/errors.hpp"
#include "spherecover/oracles.hpp"
#include "spherecover/random.hpp"
#include "spherecover/sphere.hpp"
#include "spherecover/statistics.hpp"

namespace spherecover {

enum class EvaluatorKind { exact_d2, monte_carlo };

inline std::string to_string(EvaluatorKind k) {
  return k == EvaluatorKind::exact_d2 ? "exact" : "monte-carlo";
}

inline EvaluatorKind parse_evaluator(const std::string& s) {
  if (s == "exact" || s == "exact-d2") return EvaluatorKind::exact_d2;
  if (s == "mc" || s == "monte-carlo") return EvaluatorKind::monte_carlo;
  throw ParameterError("unknown evaluator '" + s + "'");
}

inline std::int64_t default_mc_points(std::int64_t N) { return 256 * N; }

/// Number of worker threads to use when the caller does not say.
inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

struct ExperimentPlan {
  ModelParams params;
  std::int64_t replications = 1000;
  EvaluatorKind evaluator = EvaluatorKind::exact_d2;
  std::int64_t mc_points = 0;  // used only by the Monte Carlo evaluator
  Standardization standardization = Standardization::oracle_moments;
  std::uint64_t seed = 42;
  unsigned threads = 1;

  /// Exact evaluator on the circle, Monte Carlo with M = 256 N elsewhere.
  static ExperimentPlan defaults(int d, std::int64_t N, std::int64_t R,
                                 std::uint64_t seed = 42) {
    ExperimentPlan p;
    p.params = ModelParams::make(d, N);
    p.replications = R;
    p.evaluator = d == 2 ? EvaluatorKind::exact_d2 : EvaluatorKind::monte_carlo;
    p.mc_points = d == 2 ? 0 : default_mc_points(N);
    p.standardization =
        d == 2 ? Standardization::oracle_moments : Standardization::sample_moments;
    p.seed = seed;
    return p;
  }

  void validate() const {
    if (replications < 1) throw ParameterError("replications R must be >= 1");
    if (evaluator == EvaluatorKind::exact_d2 && params.d != 2) {
      throw ParameterError("exact evaluator requires d = 2");
    }
    if (evaluator == EvaluatorKind::monte_carlo && mc_points < 1) {
      throw ParameterError("Monte Carlo evaluator requires M >= 1");
    }
    if (threads < 1) throw ParameterError("threads must be >= 1");
  }

  /// M as recorded with results: 0 for the exact evaluator.
  std::int64_t effective_mc_points() const {
    return evaluator == EvaluatorKind::exact_d2 ? 0 : mc_points;
  }
};

struct ExperimentResult {
  ExperimentPlan plan;
  std::vector<double> values;  // replication order
  EmpiricalDistribution distribution;
  double seconds = 0.0;

  DenoisedVariance denoised_variance() const {
    return variance_denoise(distribution.variance, distribution.mean,
                            plan.effective_mc_points());
  }
};

namespace detail {

// Runs body(k) for k in [0, count) on `threads` workers. Work is handed out in
// contiguous chunks; body must only write state owned by index k.
template <class MakeWorker>
void parallel_for(std::int64_t count, unsigned threads, MakeWorker&& make_worker) {
  constexpr std::int64_t chunk = 64;
  std::atomic<std::int64_t> next{0};
  auto run = [&] {
    auto body = make_worker();
    for (;;) {
      const std::int64_t begin = next.fetch_add(chunk);
      if (begin >= count) break;
      const std::int64_t end = std::min(count, begin + chunk);
      for (std::int64_t k = begin; k < end; ++k) body(k);
    }
  };
  const unsigned workers =
      static_cast<unsigned>(std::max<std::int64_t>(1, std::min<std::int64_t>(threads, count)));
  if (workers == 1) {
    run();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        run();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/*
 * R independent realizations of V_N. Replication k samples its configuration
 * (and, for Monte Carlo, its test points) from Stream(seed, k), so the value
 * vector is identical for every thread count.
 */
inline ExperimentResult run_replications(const ExperimentPlan& plan) {
  plan.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.plan = plan;
  result.values.assign(static_cast<std::size_t>(plan.replications), 0.0);

  detail::parallel_for(plan.replications, plan.threads, [&] {
    return [&, mc = std::optional<MonteCarloCoverage>()](std::int64_t k) mutable {
      Stream rng(plan.seed, static_cast<std::uint64_t>(k));
      const auto config = CapConfiguration::sample(plan.params, rng);
      double v = 0.0;
      if (plan.evaluator == EvaluatorKind::exact_d2) {
        v = covered_volume_exact_d2(config).value;
      } else {
        if (!mc) mc.emplace(plan.params);
        v = mc->estimate(config, plan.mc_points, rng).value;
      }
      result.values[static_cast<std::size_t>(k)] = v;
    };
  });

  result.distribution = EmpiricalDistribution::from_values(result.values);
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Oracle variance of V_N when one is available (d = 2 only).
inline std::optional<double> oracle_variance(const ModelParams& params) {
  if (params.d == 2 && params.N >= 2) return exact_variance_d2(params.N);
  return std::nullopt;
}

/*
 * Kolmogorov distance of the standardized replications to N(0, 1), with the
 * comparison fields filled in: error of the sample mean against the exact
 * mean, de-noised variance over the oracle variance (d = 2), and the
 * Berry–Esseen bound after substituting the lemma bounds for δ1, δ2 and m4.
 * That bound uses the exact variance for d = 2 and the de-noised sample
 * variance otherwise.
 */
inline CLTReport analyze_clt(const ExperimentResult& result, Standardization mode,
                             double confidence = 0.95) {
  const ModelParams& params = result.plan.params;
  const double mean_oracle = exact_mean(params.N);
  const auto var_oracle = oracle_variance(params);
  if (mode == Standardization::oracle_moments && !var_oracle) {
    throw ParameterError("oracle-moments standardization is only available for d = 2");
  }
  CLTReport report = kolmogorov_distance(result.distribution, mode, mean_oracle,
                                         var_oracle, confidence);
  report.mean_abs_error = std::abs(result.distribution.mean - mean_oracle);
  const double var_est = result.denoised_variance().value;
  if (var_oracle) report.variance_ratio = var_est / *var_oracle;
  if (params.N >= 2) {
    const double variance = var_oracle ? *var_oracle : var_est;
    if (variance > 0.0) {
      report.theoretical_bound =
          shao_zhang_lemma_form(params.N, variance, exact_pN(params));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Replacement-difference moments
// ---------------------------------------------------------------------------

enum class RecombinationPolicy { canonical, random_k };

struct DeltaMoments {
  double delta1 = 0.0;  // estimate of E[1{Δ12 f(Y) != 0} (Δ1 f(Z))^4]
  double delta2 = 0.0;  // estimate of E[1{Δ12 f(Y) != 0, Δ13 f(Y') != 0} (Δ2 f(Z))^4]
  double m4 = 0.0;      // estimate of E[(Δ1 f(X))^4]
  double se_delta1 = 0.0;
  double se_delta2 = 0.0;
  double se_m4 = 0.0;
  double max_abs_delta1 = 0.0;  // largest |Δ1 f(X)| seen
  std::int64_t trials = 0;
};

/// Values below this magnitude count as zero in the Δ_{1,j} f != 0 indicators
/// (rounding noise of the exact circle evaluator is ~1e-16).
inline constexpr double kZeroTolerance = 1e-12;

namespace detail {

struct RunningMean {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::int64_t n = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double standard_error() const {
    if (n < 2) return 0.0;
    const double m = mean();
    const double var =
        std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

inline std::vector<Source> random_selector(std::int64_t N, Stream& rng) {
  std::vector<Source> sel(static_cast<std::size_t>(N));
  for (auto& s : sel) s = static_cast<Source>(rng.below(3));
  return sel;
}

// Evaluates the coverage functional of a trial: exact on the circle, common
// random points elsewhere.
class TrialEvaluator {
 public:
  TrialEvaluator(const ModelParams& params, std::int64_t mc_points)
      : d_(params.d),
        mc_points_(mc_points > 0 ? mc_points : default_mc_points(params.N)) {}

  void refresh(Stream& rng) {
    if (d_ != 2) points_ = PointSet::sample(d_, mc_points_, rng);
  }

  double operator()(const CapConfiguration& c) const {
    if (d_ == 2) return covered_volume_exact_d2(c).value;
    return SharedPointsEvaluator{&*points_}(c);
  }

  bool exact() const noexcept { return d_ == 2; }
  const PointSet* points() const { return points_ ? &*points_ : nullptr; }

 private:
  int d_;
  std::int64_t mc_points_;
  std::optional<PointSet> points_;
};

}  // namespace detail

/*
 * Monte Carlo estimates of δ1, δ2 and E[(Δ1 f(X))^4] over `trials` independent
 * draws of (X, X', X~). The canonical policy uses Y = Y' = Z = X. The random-k
 * policy draws k selector triples (Y, Y', Z) once, estimates each expectation
 * with all trials, and reports the largest estimate, which is a lower bound
 * on the supremum over recombinations. Needs N >= 3.
 */
inline DeltaMoments estimate_delta_moments(const ModelParams& params, std::int64_t trials,
                                           Stream& rng,
                                           RecombinationPolicy policy = RecombinationPolicy::canonical,
                                           int random_selectors = 4,
                                           std::int64_t mc_points = 0) {
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (params.N < 3) throw ParameterError("delta moments need N >= 3");
  struct Choice {
    std::vector<Source> y, y_prime, z;
  };
  std::vector<Choice> choices;
  const std::vector<Source> canonical(static_cast<std::size_t>(params.N), Source::base);
  if (policy == RecombinationPolicy::canonical) {
    choices.push_back({canonical, canonical, canonical});
  } else {
    if (random_selectors < 1) throw ParameterError("random-k policy needs k >= 1");
    for (int c = 0; c < random_selectors; ++c) {
      auto y = detail::random_selector(params.N, rng);
      auto yp = detail::random_selector(params.N, rng);
      auto z = detail::random_selector(params.N, rng);
      choices.push_back({std::move(y), std::move(yp), std::move(z)});
    }
  }

  std::vector<detail::RunningMean> d1(choices.size());
  std::vector<detail::RunningMean> d2(choices.size());
  detail::RunningMean m4;
  double max_abs = 0.0;
  detail::TrialEvaluator f(params, mc_points);

  for (std::int64_t t = 0; t < trials; ++t) {
    auto scheme = ReplacementScheme::sample(params, rng);
    f.refresh(rng);

    const double first = delta1(scheme, f);
    max_abs = std::max(max_abs, std::abs(first));
    m4.add(std::pow(first, 4));

    for (std::size_t c = 0; c < choices.size(); ++c) {
      scheme.set_selector(choices[c].y);
      const bool nonzero12 = std::abs(delta12(scheme, 0, 1, f)) > kZeroTolerance;
      bool nonzero13 = false;
      if (nonzero12) {
        scheme.set_selector(choices[c].y_prime);
        nonzero13 = std::abs(delta12(scheme, 0, 2, f)) > kZeroTolerance;
      }
      double w1 = 0.0;
      double w2 = 0.0;
      if (nonzero12) {
        scheme.set_selector(choices[c].z);
        w1 = std::pow(replacement_difference(scheme, 0, f), 4);
        if (nonzero13) w2 = std::pow(replacement_difference(scheme, 1, f), 4);
      }
      d1[c].add(w1);
      d2[c].add(w2);
    }
  }

  DeltaMoments out;
  out.trials = trials;
  out.m4 = m4.mean();
  out.se_m4 = m4.standard_error();
  out.max_abs_delta1 = max_abs;
  for (std::size_t c = 0; c < choices.size(); ++c) {
    if (c == 0 || d1[c].mean() > out.delta1) {
      out.delta1 = d1[c].mean();
      out.se_delta1 = d1[c].standard_error();
    }
    if (c == 0 || d2[c].mean() > out.delta2) {
      out.delta2 = d2[c].mean();
      out.se_delta2 = d2[c].standard_error();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma suites
// ---------------------------------------------------------------------------

struct FirstDifferenceSuite {
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double max_scaled = 0.0;  // max over trials of |Δ1 f(Z)| / bound
};

/*
 * |Δ1 f(Z)| <= 1/N on random schemes with uniformly random selectors and N
 * drawn uniformly from [n_min, n_max]. Trial t uses Stream(seed, t). On the
 * circle the bound is 1/N + 1e-12 with the exact evaluator; otherwise the
 * common-random-points evaluator is checked against the same bound for its
 * empirical measure, max(σ_M(C(Z_1)), σ_M(C(X'_1))).
 */
inline FirstDifferenceSuite first_difference_suite(int d, std::int64_t n_min,
                                                   std::int64_t n_max,
                                                   std::int64_t trials,
                                                   std::uint64_t seed,
                                                   std::int64_t mc_points = 0) {
  if (n_min < 1 || n_max < n_min) throw ParameterError("invalid N range");
  std::map<std::int64_t, ModelParams> cache;
  FirstDifferenceSuite suite;
  suite.trials = trials;
  for (std::int64_t t = 0; t < trials; ++t) {
    Stream rng(seed, static_cast<std::uint64_t>(t));
    const auto N = n_min + static_cast<std::int64_t>(
                               rng.below(static_cast<std::uint64_t>(n_max - n_min + 1)));
    auto it = cache.find(N);
    if (it == cache.end()) it = cache.emplace(N, ModelParams::make(d, N)).first;
    const ModelParams& params = it->second;

    auto scheme = ReplacementScheme::sample(params, rng);
    scheme.set_selector(detail::random_selector(N, rng));
    detail::TrialEvaluator f(params, mc_points);
    f.refresh(rng);
    const double diff = delta1(scheme, f);

    double bound = params.cap_fraction();
    if (!f.exact()) {
      const PointSet& pts = *f.points();
      std::int64_t in_z = 0;
      std::int64_t in_primed = 0;
      for (std::int64_t k = 0; k < pts.size(); ++k) {
        const auto p = pts.point(k);
        in_z += detail::dot(scheme.z_center(0), p) >= params.cos_radius ? 1 : 0;
        in_primed += detail::dot(scheme.primed().center(0), p) >= params.cos_radius ? 1 : 0;
      }
      bound = static_cast<double>(std::max(in_z, in_primed)) / static_cast<double>(pts.size());
    }
    if (std::abs(diff) > bound + 1e-12) ++suite.violations;
    if (bound > 0.0) suite.max_scaled = std::max(suite.max_scaled, std::abs(diff) / bound);
  }
  return suite;
}

struct LocalitySuite {
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  double max_abs = 0.0;  // max |Δ12 f(Y)| over accepted schemes
  std::int64_t draws = 0;  // total rejection-sampling draws
};

inline constexpr std::int64_t kRejectionRetryCap = 1'000'000;

/*
 * Δ12 f(Y) = 0 whenever C(Y_1), C(X'_1), C(Y_2), C(X'_2) are pairwise disjoint.
 * Coordinates 1 and 2 are redrawn until the four caps are disjoint (at most
 * kRejectionRetryCap draws per trial; exceeding it throws SolverError, which
 * happens when N is too small for four disjoint caps to exist).
 */
inline LocalitySuite locality_suite(int d, std::int64_t n_min, std::int64_t n_max,
                                    std::int64_t trials, std::uint64_t seed,
                                    std::int64_t mc_points = 0) {
  if (n_min < 2 || n_max < n_min) throw ParameterError("invalid N range");
  std::map<std::int64_t, ModelParams> cache;
  LocalitySuite suite;
  suite.trials = trials;
  for (std::int64_t t = 0; t < trials; ++t) {
    Stream rng(seed, static_cast<std::uint64_t>(t));
    const auto N = n_min + static_cast<std::int64_t>(
                               rng.below(static_cast<std::uint64_t>(n_max - n_min + 1)));
    auto it = cache.find(N);
    if (it == cache.end()) it = cache.emplace(N, ModelParams::make(d, N)).first;
    const ModelParams& params = it->second;

    auto scheme = ReplacementScheme::sample(params, rng);
    auto selector = detail::random_selector(N, rng);
    std::vector<CapConfiguration> copies{scheme.base(), scheme.primed(), scheme.tilde()};
    std::vector<double> buf(static_cast<std::size_t>(d));
    std::int64_t attempt = 0;
    for (;; ++attempt) {
      if (attempt >= kRejectionRetryCap) {
        throw SolverError("rejection sampling for disjoint caps exceeded " +
                          std::to_string(kRejectionRetryCap) + " draws at N=" +
                          std::to_string(N));
      }
      if (attempt > 0) {
        for (auto& c : copies) {
          for (std::int64_t i : {0, 1}) {
            sample_uniform_sphere_into(buf, rng);
            c.set_center(i, buf);
          }
        }
        selector[0] = static_cast<Source>(rng.below(3));
        selector[1] = static_cast<Source>(rng.below(3));
      }
      scheme = ReplacementScheme(copies[0], copies[1], copies[2], selector);
      if (relevant_caps_disjoint(scheme, 0, 1)) break;
    }
    suite.draws += attempt + 1;
    detail::TrialEvaluator f(params, mc_points);
    f.refresh(rng);
    const double value = std::abs(delta12(scheme, 0, 1, f));
    suite.max_abs = std::max(suite.max_abs, value);
    if (value > kZeroTolerance) ++suite.violations;
  }
  return suite;
}

// ---------------------------------------------------------------------------
// Aggregate verification
// ---------------------------------------------------------------------------

enum class CheckStatus { pass, fail, skipped };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

struct LedgerEntry {
  std::string id;
  std::string claim;
  double value = 0.0;
  double threshold = 0.0;
  CheckStatus status = CheckStatus::pass;
  std::string detail;
};

struct VerificationBudget {
  std::int64_t lemma_trials = 10'000;
  std::int64_t delta_trials = 20'000;
  std::int64_t replications = 20'000;
  std::int64_t pair_trials = 100'000;
  int random_selectors = 4;
  std::int64_t mc_points = 0;  // 0: 256 N
};

struct VerificationReport {
  ModelParams params;
  BoundReport bounds;
  DeltaMoments deltas;
  CLTReport clt;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  std::vector<LedgerEntry> entries;

  bool all_passed() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const LedgerEntry& e) { return e.status == CheckStatus::fail; });
  }
};

/*
 * Runs every checkable consequence at one (d, N): the first-difference and
 * locality suites, the δ reductions, the p_N bound (exactly and by sampling
 * cap pairs), the mean and variance oracles, the variance sandwich shape, and
 * the Berry–Esseen consistency check d_K <= bound(estimated ingredients).
 */
inline VerificationReport verify_all(const ModelParams& params,
                                     const AbsoluteConstants& constants,
                                     const VerificationBudget& budget,
                                     std::uint64_t seed = 42, unsigned threads = 1) {
  constants.validate();
  if (params.N < 3) throw ParameterError("verify_all needs N >= 3");
  VerificationReport report;
  report.params = params;
  report.bounds = bound_report(params, constants);
  auto add = [&](std::string id, std::string claim, double value, double threshold,
                 bool ok, std::string detail = {}) {
    report.entries.push_back({std::move(id), std::move(claim), value, threshold,
                              ok ? CheckStatus::pass : CheckStatus::fail, std::move(detail)});
  };
  const std::int64_t mc_points =
      budget.mc_points > 0 ? budget.mc_points : default_mc_points(params.N);

  // First replacement difference.
  const auto first = first_difference_suite(params.d, params.N, params.N,
                                            budget.lemma_trials, seed ^ 0x1001, mc_points);
  add("first_difference_bound", "|Delta_1 f(Z)| <= 1/N for every recombination",
      first.max_scaled, 1.0, first.violations == 0,
      std::to_string(first.violations) + " violations in " + std::to_string(first.trials) +
          " trials");

  // Locality.
  try {
    const auto loc = locality_suite(params.d, params.N, params.N, budget.lemma_trials,
                                    seed ^ 0x2002, mc_points);
    add("locality", "Delta_{1,2} f(Y) = 0 when the four relevant caps are disjoint",
        loc.max_abs, kZeroTolerance, loc.violations == 0,
        std::to_string(loc.violations) + " violations in " + std::to_string(loc.trials) +
            " trials");
  } catch (const SolverError& e) {
    report.entries.push_back({"locality",
                              "Delta_{1,2} f(Y) = 0 when the four relevant caps are disjoint",
                              0.0, kZeroTolerance, CheckStatus::skipped, e.what()});
  }

  // δ reductions and the fourth moment.
  Stream delta_rng(seed, 0xDE17A);
  report.deltas = estimate_delta_moments(params, budget.delta_trials, delta_rng,
                                         RecombinationPolicy::canonical, 0, mc_points);
  {
    Stream random_rng(seed, 0xDE17B);
    const auto random_k = estimate_delta_moments(
        params, std::max<std::int64_t>(1, budget.delta_trials / 4), random_rng,
        RecombinationPolicy::random_k, budget.random_selectors, mc_points);
    const auto& b = report.bounds;
    const auto& c = report.deltas;
    const double m4_limit =
        b.m4_bound + (params.d == 2 ? 1e-30 : 4.0 * c.se_m4);
    add("fourth_moment_bound", "E[(Delta_1 f)^4] <= 1/N^4", c.m4, m4_limit, c.m4 <= m4_limit);
    add("delta1_reduction", "delta_1 <= 4 p_N / N^4 (canonical recombination)", c.delta1,
        b.delta1_bound + 4.0 * c.se_delta1, c.delta1 <= b.delta1_bound + 4.0 * c.se_delta1);
    add("delta2_reduction", "delta_2 <= 16 p_N^2 / N^4 (canonical recombination)", c.delta2,
        b.delta2_bound + 4.0 * c.se_delta2, c.delta2 <= b.delta2_bound + 4.0 * c.se_delta2);
    add("delta1_reduction_random",
        "delta_1 <= 4 p_N / N^4 (max over sampled recombinations)", random_k.delta1,
        b.delta1_bound + 4.0 * random_k.se_delta1,
        random_k.delta1 <= b.delta1_bound + 4.0 * random_k.se_delta1);
    add("delta2_reduction_random",
        "delta_2 <= 16 p_N^2 / N^4 (max over sampled recombinations)", random_k.delta2,
        b.delta2_bound + 4.0 * random_k.se_delta2,
        random_k.delta2 <= b.delta2_bound + 4.0 * random_k.se_delta2);
  }

  // Intersection probability.
  {
    const auto& b = report.bounds;
    if (params.d == 2) {
      add("intersection_probability_bound", "p_N <= 2^{d-1}/N (equality on the circle)",
          b.p_N, b.p_N_bound, std::abs(b.p_N - b.p_N_bound) <= 1e-14);
    } else {
      add("intersection_probability_bound", "p_N <= 2^{d-1}/N", b.p_N, b.p_N_bound,
          b.p_N <= b.p_N_bound);
    }
    Stream pair_rng(seed, 0x9A1C);
    std::int64_t hits = 0;
    for (std::int64_t t = 0; t < budget.pair_trials; ++t) {
      const Cap a(sample_uniform_sphere(params.d, pair_rng), params.radius);
      const Cap c(sample_uniform_sphere(params.d, pair_rng), params.radius);
      hits += caps_intersect(a, c) ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(budget.pair_trials);
    const double se =
        std::sqrt(b.p_N * (1.0 - b.p_N) / static_cast<double>(budget.pair_trials));
    add("intersection_probability_sampled",
        "P(two random caps meet) = sigma(cap of radius 2 r_N)", std::abs(freq - b.p_N),
        4.0 * se, std::abs(freq - b.p_N) <= 4.0 * se,
        "sampled frequency " + std::to_string(freq));
  }

  // Variance sandwich shape.
  {
    const auto& s = report.bounds.sandwich;
    add("variance_sandwich_shape", "lower variance bound < upper variance bound",
        s.lower, s.upper, s.lower < s.upper);
  }

  // Replications: mean, variance, Kolmogorov distance.
  ExperimentPlan plan = ExperimentPlan::defaults(params.d, params.N, budget.replications, seed);
  plan.params = params;
  plan.mc_points = params.d == 2 ? 0 : mc_points;
  plan.threads = threads;
  const auto result = run_replications(plan);
  report.sample_mean = result.distribution.mean;
  report.sample_variance = result.distribution.variance;
  const double mean_oracle = exact_mean(params.N);
  const double se_mean = result.distribution.standard_error();
  add("mean", "E[V_N] = 1 - (1 - 1/N)^N in every dimension",
      std::abs(result.distribution.mean - mean_oracle), 4.0 * se_mean,
      std::abs(result.distribution.mean - mean_oracle) <= 4.0 * se_mean);

  const double var_est = result.denoised_variance().value;
  if (const auto var_oracle = oracle_variance(params)) {
    const double r = static_cast<double>(result.distribution.size());
    const double kurt = result.distribution.fourth_central_moment /
                        (result.distribution.variance * result.distribution.variance);
    const double se_var = *var_oracle * std::sqrt(std::max(0.0, kurt - (r - 3.0) / (r - 1.0)) / r);
    add("variance_oracle", "sample variance matches the exact circle variance",
        std::abs(var_est - *var_oracle), 4.0 * se_var,
        std::abs(var_est - *var_oracle) <= 4.0 * se_var);
  }

  report.clt = analyze_clt(result, plan.standardization);
  if (var_est > 0.0) {
    const auto& c = report.deltas;
    const double bound = shao_zhang_bound(params.N, var_est, c.delta1, c.delta2, c.m4);
    report.clt.theoretical_bound = bound;
    add("berry_esseen_consistency", "d_K(W_N, N(0,1)) <= Berry-Esseen bound on estimates",
        report.clt.empirical_dK, bound, report.clt.empirical_dK <= bound);

    const double plug = shao_zhang_bound(params.N, var_est, report.bounds.delta1_bound,
                                         report.bounds.delta2_bound, report.bounds.m4_plugin);
    const double closed = shao_zhang_lemma_form(params.N, var_est, report.bounds.p_N);
    add("berry_esseen_plugin_identity",
        "bound with lemma plug-ins = 12 Var^{-1}(2 sqrt(p)/N + 4p/sqrt(N) + 4/N^{3/2})",
        std::abs(plug - closed) / closed, 1e-12, std::abs(plug - closed) <= 1e-12 * closed);
  }
  return report;
}

}  // namespace spherecover
