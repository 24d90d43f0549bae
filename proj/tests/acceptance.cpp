// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Single-criterion runs: `acceptance 3 8`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spherecover/cli.hpp"
#include "spherecover/spherecover.hpp"

using namespace spherecover;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

unsigned threads() { return default_thread_count(); }

ExperimentResult replicate(int d, std::int64_t N, std::int64_t R, std::uint64_t seed) {
  auto plan = ExperimentPlan::defaults(d, N, R, seed);
  plan.threads = threads();
  return run_replications(plan);
}

// Mean is dimension-free and close to 1 - 1/e.
Outcome mean_grid() {
  Outcome o{true, ""};
  for (int d : {2, 3}) {
    for (std::int64_t n : {10, 100, 1000}) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto r = replicate(d, n, 200000, 1000 + static_cast<std::uint64_t>(d * 10000 + n));
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double exact = exact_mean(n);
      const double err = std::abs(r.distribution.mean - exact);
      const double tol = 4.0 * r.distribution.standard_error();
      const bool ok = err <= tol && std::abs(exact - (1.0 - std::exp(-1.0))) <= 1.0 / n;
      o.pass = o.pass && ok;
      o.detail += " (d=" + std::to_string(d) + ",N=" + std::to_string(n) + ": |err|=" +
                  num(err) + " tol=" + num(tol) + " " + num(secs) + "s)";
    }
  }
  return o;
}

Outcome two_caps() {
  const auto r = replicate(2, 2, 100000, 2);
  const double se = r.distribution.standard_error();
  const double mean_err = std::abs(r.distribution.mean - 0.75);
  const double var_rel = std::abs(r.distribution.variance * 48.0 - 1.0);
  return {mean_err <= 4.0 * se && var_rel <= 0.05,
          "|mean-3/4|=" + num(mean_err) + " (4se=" + num(4.0 * se) +
              ") var rel err=" + num(var_rel)};
}

Outcome variance_oracle() {
  Outcome o{true, ""};
  for (std::int64_t n : {50, 200}) {
    const auto r = replicate(2, n, 100000, 3000 + static_cast<std::uint64_t>(n));
    const double rel = std::abs(r.distribution.variance / exact_variance_d2(n) - 1.0);
    o.pass = o.pass && rel < 0.05;
    o.detail += " N=" + std::to_string(n) + " rel err=" + num(rel);
  }
  double lo = 1e300;
  double hi = 0.0;
  for (std::int64_t n : {50, 100, 200, 400}) {
    const double scaled = static_cast<double>(n) *
                          replicate(2, n, 100000, 3100 + static_cast<std::uint64_t>(n))
                              .distribution.variance;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  o.pass = o.pass && hi / lo - 1.0 < 0.30;
  o.detail += " N*Var spread=" + num(hi / lo - 1.0);
  return o;
}

Outcome first_difference() {
  const auto s = first_difference_suite(2, 2, 64, 10000, 4);
  // Fourth moment per N from canonical schemes.
  double worst = 0.0;
  for (std::int64_t n = 2; n <= 64; ++n) {
    const auto params = ModelParams::make(2, n);
    Stream rng(41, static_cast<std::uint64_t>(n));
    double sum = 0.0;
    constexpr int trials = 200;
    for (int t = 0; t < trials; ++t) {
      const auto scheme = ReplacementScheme::sample(params, rng);
      sum += std::pow(delta1(scheme, ExactD2Evaluator{}), 4);
    }
    worst = std::max(worst, sum / trials * std::pow(static_cast<double>(n), 4));
  }
  return {s.violations == 0 && worst <= 1.0 + 1e-9,
          std::to_string(s.violations) + " violations in " + std::to_string(s.trials) +
              " trials, max |D1|*N=" + num(s.max_scaled) + ", max m4*N^4=" + num(worst)};
}

Outcome locality() {
  const auto s = locality_suite(2, 8, 64, 10000, 5);
  return {s.violations == 0 && s.max_abs <= 1e-12,
          std::to_string(s.violations) + " violations in " + std::to_string(s.trials) +
              " trials, max |D12|=" + num(s.max_abs) + ", draws=" + std::to_string(s.draws)};
}

Outcome intersection_probability() {
  double worst_d2 = 0.0;
  int strict_failures = 0;
  int cells = 0;
  for (std::int64_t n : {10, 100, 1000, 10000, 100000}) {
    worst_d2 = std::max(worst_d2, std::abs(exact_pN(ModelParams::make(2, n)) - 2.0 / n));
    for (int d = 3; d <= 10; ++d) {
      const auto p = ModelParams::make(d, n);
      ++cells;
      if (!(exact_pN(p) < pN_bound(p))) ++strict_failures;
    }
  }
  return {worst_d2 <= 1e-14 && strict_failures == 0,
          "max |p_N - 2/N| (d=2)=" + num(worst_d2) + ", strict bound held in " +
              std::to_string(cells - strict_failures) + "/" + std::to_string(cells) + " cells"};
}

Outcome delta_reductions() {
  const auto params = ModelParams::make(2, 32);
  Stream rng(7);
  const auto m = estimate_delta_moments(params, 100000, rng);
  const double p = exact_pN(params);
  const double b1 = delta1_bound(p, 32);
  const double b2 = delta2_bound(p, 32);
  return {m.delta1 <= b1 + 4.0 * m.se_delta1 && m.delta2 <= b2 + 4.0 * m.se_delta2,
          "delta1=" + num(m.delta1) + " <= " + num(b1) + "+4se(" + num(4.0 * m.se_delta1) +
              "), delta2=" + num(m.delta2) + " <= " + num(b2) + "+4se(" +
              num(4.0 * m.se_delta2) + ")"};
}

Outcome clt_trend() {
  std::vector<double> dk;
  double radius = 0.0;
  std::string detail;
  for (std::int64_t n : {10, 100, 1000}) {
    const auto r = replicate(2, n, 100000, 8000 + static_cast<std::uint64_t>(n));
    const auto rep = analyze_clt(r, Standardization::oracle_moments);
    dk.push_back(rep.empirical_dK);
    radius = rep.dkw_radius;
    detail += " dK(N=" + std::to_string(n) + ")=" + num(rep.empirical_dK);
  }
  const bool decreasing = dk[0] - dk[1] > radius && dk[1] - dk[2] > radius;
  return {decreasing && dk[2] <= 0.05, detail + " DKW radius=" + num(radius)};
}

Outcome shao_zhang_consistency() {
  const auto params = ModelParams::make(2, 100);
  const auto r = replicate(2, 100, 100000, 9);
  const auto rep = analyze_clt(r, Standardization::oracle_moments);
  Stream rng(90);
  const auto m = estimate_delta_moments(params, 100000, rng);
  const double var = r.denoised_variance().value;
  const double bound = shao_zhang_bound(100, var, m.delta1, m.delta2, m.m4);

  double worst_rel = 0.0;
  for (int d : {2, 3, 4, 6}) {
    for (std::int64_t n : {3, 10, 100, 1000, 100000}) {
      const auto pp = ModelParams::make(d, n);
      const double p = exact_pN(pp);
      const double v = 0.1 / static_cast<double>(n);
      const double plug = shao_zhang_bound(n, v, delta1_bound(p, n), delta2_bound(p, n),
                                           m4_plugin(n));
      const double closed = shao_zhang_lemma_form(n, v, p);
      worst_rel = std::max(worst_rel, std::abs(plug - closed) / closed);
    }
  }
  return {rep.empirical_dK <= bound && worst_rel <= 1e-12,
          "dK=" + num(rep.empirical_dK) + " <= bound=" + num(bound) +
              ", identity rel err=" + num(worst_rel)};
}

Outcome mc_calibration() {
  const auto params = ModelParams::make(2, 32);
  constexpr std::int64_t m = 100000;
  int outside = 0;
  for (int t = 0; t < 100; ++t) {
    Stream rng(10, static_cast<std::uint64_t>(t));
    const auto c = CapConfiguration::sample(params, rng);
    const double exact = covered_volume_exact_d2(c).value;
    const double est = covered_volume_mc(c, m, rng).value;
    const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(m));
    if (std::abs(est - exact) > 4.0 * se) ++outside;
  }
  return {outside <= 6, std::to_string(outside) + "/100 trials beyond 4 conditional SE"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / ("spherecover_acceptance_" +
                                                std::to_string(::getpid()));
  fs::create_directories(dir);
  Outcome o{true, ""};
  const std::vector<std::vector<std::string>> configs = {
      {"simulate", "--d", "2", "--N", "100", "--R", "20000", "--seed", "11"},
      {"simulate", "--d", "3", "--N", "100", "--R", "2000", "--seed", "11"},
      {"simulate", "--d", "5", "--N", "50", "--R", "500", "--M", "2000", "--seed", "11"}};
  for (std::size_t c = 0; c < configs.size(); ++c) {
    std::set<std::string> distinct;
    for (const char* t : {"1", "4", "8"}) {
      const auto out = (dir / ("c" + std::to_string(c) + "_t" + t + ".csv")).string();
      std::vector<std::string> args{"spherecover"};
      args.insert(args.end(), configs[c].begin(), configs[c].end());
      args.insert(args.end(), {"--threads", t, "--output", out});
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream sink;
      const int code =
          cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink, sink);
      if (code != 0) o.pass = false;
      distinct.insert(slurp(out));
    }
    o.pass = o.pass && distinct.size() == 1;
    o.detail += " config " + std::to_string(c) + ": " + std::to_string(distinct.size()) +
                " distinct output(s)";
  }
  fs::remove_all(dir);
  return o;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "mean is dimension-free", mean_grid},
      {2, "exact law with two caps", two_caps},
      {3, "variance oracle equivalence and 1/N scaling", variance_oracle},
      {4, "first replacement difference bounded by 1/N", first_difference},
      {5, "second replacement difference vanishes for disjoint caps", locality},
      {6, "cap intersection probability bound", intersection_probability},
      {7, "delta reductions", delta_reductions},
      {8, "Kolmogorov distance trend", clt_trend},
      {9, "Berry-Esseen consistency", shao_zhang_consistency},
      {10, "Monte Carlo calibration", mc_calibration},
      {11, "thread-count determinism", determinism},
  };
  std::set<int> selected;
  for (int k = 1; k < argc; ++k) selected.insert(std::stoi(argv[k]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] AC%d %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
