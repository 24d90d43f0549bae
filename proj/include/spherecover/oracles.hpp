#pragma once

// Closed-form and quadrature ground truth for the covering model, and
// evaluators for the theoretical bounds on Var(V_N), p_N and d_K(W_N, N(0,1)).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "spherecover/errors.hpp"
#include "spherecover/sphere.hpp"

namespace spherecover {

/*
 * Absolute constants of the variance sandwich
 *
 *     e^{-C1} c1^{d-1} / N  <=  Var(V_N)  <=  e^{-1} c2^{d-1} / N
 *
 * and the growth rate alpha of the admissible dimension d(N) <= alpha ln N.
 * Their true values are unknown; the defaults are for illustrating bound
 * shapes only.
 */
struct AbsoluteConstants {
  double c1 = 0.25;
  double c2 = 0.75;
  double C1 = 1.5;
  double alpha = 0.25;

  void validate() const {
    if (!(c1 > 0.0 && c1 < 1.0)) throw ParameterError("c1 must lie in (0, 1)");
    if (!(c2 > 0.0 && c2 < 1.0)) throw ParameterError("c2 must lie in (0, 1)");
    if (!(C1 > 1.0 && C1 < 2.0)) throw ParameterError("C1 must lie in (1, 2)");
    if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  }

  /// Largest alpha for which the regime rate exponent is negative.
  double alpha_limit() const { return 1.0 / (2.0 * std::log(2.0 / c1)); }
  bool alpha_admissible() const { return alpha < alpha_limit(); }
};

/// E[V_N] = 1 - (1 - 1/N)^N in every dimension: each point of the sphere is
/// missed by one cap with probability 1 - 1/N.
inline double exact_mean(std::int64_t N) {
  if (N < 1) throw ParameterError("exact_mean needs N >= 1");
  const double n = static_cast<double>(N);
  return -std::expm1(n * std::log1p(-1.0 / n));
}

/*
 * Exact Var(V_N) on the circle. With U the uncovered fraction,
 *
 *   E[U]   = (1 - 1/N)^N
 *   E[U^2] = (1/π) ∫_0^π (1 - 2/N + ov(θ))^N dθ,  ov(θ) = max(0, 2r - θ) / 2π,
 *
 * because two points at angular distance θ are both uncovered by one cap with
 * probability 1 - σ(C(x) ∪ C(y)) and that distance is uniform on [0, π].
 * Var(V_N) = Var(U). The integral is split at the kink θ = 2r = 2π/N and each
 * piece is integrated with composite 8-point Gauss–Legendre using at least
 * `quad_nodes` nodes in total.
 */
inline double exact_variance_d2(std::int64_t N, int quad_nodes = 4096) {
  if (N < 2) throw ParameterError("exact_variance_d2 needs N >= 2");
  if (quad_nodes < 64) throw ParameterError("exact_variance_d2 needs >= 64 nodes");
  const double n = static_cast<double>(N);
  const double kink = 2.0 * kPi / n;
  const double base = 1.0 - 2.0 / n;
  auto integrand = [&](double theta) {
    const double overlap = std::max(0.0, kink - theta) / (2.0 * kPi);
    return std::pow(base + overlap, n);
  };
  const int panels = std::max(1, (quad_nodes + 15) / 16);
  auto composite = [&](double a, double b) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int k = 0; k < panels; ++k) {
      sum += boost::math::quadrature::gauss<double, 8>::integrate(
          integrand, a + k * h, k + 1 == panels ? b : a + (k + 1) * h);
    }
    return sum;
  };
  const double second = (composite(0.0, kink) + composite(kink, kPi)) / kPi;
  const double first = std::pow(1.0 - 1.0 / n, n);
  return second - first * first;
}

/// p_N = P(two independent caps of radius r_N meet) = σ(C(x, 2 r_N)).
inline double exact_pN(const ModelParams& params) {
  if (params.N < 2) throw ParameterError("exact_pN needs N >= 2");
  return cap_measure(params.d, std::min(2.0 * params.radius, kPi));
}

/// Upper bound 2^{d-1} / N on p_N.
inline double pN_bound(const ModelParams& params) {
  return std::ldexp(1.0, params.d - 1) / static_cast<double>(params.N);
}

inline double delta1_bound(double pN, std::int64_t N) {
  return 4.0 * pN / std::pow(static_cast<double>(N), 4);
}

inline double delta2_bound(double pN, std::int64_t N) {
  return 16.0 * pN * pN / std::pow(static_cast<double>(N), 4);
}

/// Moment bound E[(Δ1 f)^4] <= 1/N^4 implied by |Δ1 f| <= 1/N.
inline double m4_bound(std::int64_t N) {
  return 1.0 / std::pow(static_cast<double>(N), 4);
}

/// Fourth-moment value substituted into the Berry–Esseen bound to reach the
/// closed form below. It is 16 times looser than m4_bound.
inline double m4_plugin(std::int64_t N) { return 16.0 * m4_bound(N); }

/// Berry–Esseen bound for symmetric statistics:
/// 12 √N Var^{-1} (√(N δ1) + N √δ2 + √m4).
inline double shao_zhang_bound(std::int64_t N, double variance, double delta1,
                               double delta2, double m4) {
  if (!(variance > 0.0)) throw ParameterError("variance must be positive");
  if (delta1 < 0.0 || delta2 < 0.0 || m4 < 0.0) {
    throw ParameterError("delta1, delta2 and m4 must be nonnegative");
  }
  const double n = static_cast<double>(N);
  return 12.0 * std::sqrt(n) / variance *
         (std::sqrt(n * delta1) + n * std::sqrt(delta2) + std::sqrt(m4));
}

/// The same bound after substituting δ1 = 4p/N^4, δ2 = 16p²/N^4 and
/// m4 = m4_plugin(N) = 16/N^4, simplified:
/// 12 Var^{-1} (2√p/N + 4p/√N + 4/N^{3/2}).
inline double shao_zhang_lemma_form(std::int64_t N, double variance, double pN) {
  if (!(variance > 0.0)) throw ParameterError("variance must be positive");
  const double n = static_cast<double>(N);
  return 12.0 / variance *
         (2.0 * std::sqrt(pN) / n + 4.0 * pN / std::sqrt(n) + 4.0 / std::pow(n, 1.5));
}

struct RateBound {
  double fixed_dimension = 0.0;   // 72 e^{C1} c1 (2/c1)^d / √N
  double regime = 0.0;            // 72 e^{C1} c1 N^{alpha ln(2/c1) - 1/2}
  double regime_exponent = 0.0;   // alpha ln(2/c1) - 1/2
};

inline RateBound rate_bound(const ModelParams& params, const AbsoluteConstants& k) {
  k.validate();
  const double n = static_cast<double>(params.N);
  const double prefactor = 72.0 * std::exp(k.C1) * k.c1;
  RateBound out;
  out.fixed_dimension = prefactor * std::pow(2.0 / k.c1, params.d) / std::sqrt(n);
  out.regime_exponent = k.alpha * std::log(2.0 / k.c1) - 0.5;
  out.regime = prefactor * std::pow(n, out.regime_exponent);
  return out;
}

/// Largest dimension allowed by d <= alpha ln N, never below 2.
inline int admissible_dimension(std::int64_t N, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("alpha must be positive");
  if (N < 2) throw ParameterError("admissible_dimension needs N >= 2");
  const double d = std::floor(alpha * std::log(static_cast<double>(N)));
  return std::max(2, static_cast<int>(d));
}

struct VarianceSandwich {
  double lower = 0.0;
  double upper = 0.0;
};

inline VarianceSandwich variance_sandwich(const ModelParams& params,
                                          const AbsoluteConstants& k) {
  k.validate();
  const double n = static_cast<double>(params.N);
  return {std::exp(-k.C1) * std::pow(k.c1, params.d - 1) / n,
          std::exp(-1.0) * std::pow(k.c2, params.d - 1) / n};
}

struct BoundReport {
  double p_N = 0.0;
  double p_N_bound = 0.0;
  double delta1_bound = 0.0;
  double delta2_bound = 0.0;
  double m4_bound = 0.0;   // 1/N^4
  double m4_plugin = 0.0;  // 16/N^4, used in shao_zhang_bound
  double variance = 0.0;            // variance fed to the Berry–Esseen bound
  std::string variance_source;      // "exact_d2" or "sandwich_lower"
  double shao_zhang_bound = 0.0;
  RateBound rate;
  VarianceSandwich sandwich;
};

/// All bound values at (d, N). The Berry–Esseen bound uses the exact
/// variance on the circle and the sandwich lower bound otherwise.
inline BoundReport bound_report(const ModelParams& params, const AbsoluteConstants& k) {
  k.validate();
  BoundReport r;
  r.p_N = exact_pN(params);
  r.p_N_bound = pN_bound(params);
  r.delta1_bound = delta1_bound(r.p_N, params.N);
  r.delta2_bound = delta2_bound(r.p_N, params.N);
  r.m4_bound = m4_bound(params.N);
  r.m4_plugin = m4_plugin(params.N);
  r.sandwich = variance_sandwich(params, k);
  if (params.d == 2) {
    r.variance = exact_variance_d2(params.N);
    r.variance_source = "exact_d2";
  } else {
    r.variance = r.sandwich.lower;
    r.variance_source = "sandwich_lower";
  }
  r.shao_zhang_bound = shao_zhang_bound(params.N, r.variance, r.delta1_bound,
                                        r.delta2_bound, r.m4_plugin);
  r.rate = rate_bound(params, k);
  return r;
}

}  // namespace spherecover
