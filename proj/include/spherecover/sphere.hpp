#pragma once

// Uniform sampling on S^{d-1} and geodesic-cap geometry.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "spherecover/errors.hpp"
#include "spherecover/random.hpp"

namespace spherecover {

inline constexpr double kPi = std::numbers::pi;

namespace detail {

inline void require_dimension(int d) {
  if (d < 2) throw InvalidDimension(d);
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

}  // namespace detail

/// A point of S^{d-1}, stored as its d Cartesian coordinates.
class Point {
 public:
  Point() = default;

  /// Takes ownership of the coordinates; they must have unit Euclidean norm
  /// within 1e-12 and d >= 2.
  explicit Point(std::vector<double> coords) : coords_(std::move(coords)) {
    detail::require_dimension(static_cast<int>(coords_.size()));
    const double norm = std::sqrt(detail::dot(coords_, coords_));
    if (std::abs(norm - 1.0) > 1e-12) {
      throw DomainError("point is not on the unit sphere (norm " +
                        std::to_string(norm) + ")");
    }
  }

  /// Normalizes an arbitrary nonzero vector onto the sphere.
  static Point normalized(std::vector<double> v) {
    const double norm = std::sqrt(detail::dot(v, v));
    if (!(norm > 0.0)) throw DomainError("cannot normalize the zero vector");
    for (double& x : v) x /= norm;
    Point p;
    p.coords_ = std::move(v);
    detail::require_dimension(p.dim());
    return p;
  }

  /// Point on the unit circle at polar angle theta.
  static Point on_circle(double theta) {
    Point p;
    p.coords_ = {std::cos(theta), std::sin(theta)};
    return p;
  }

  int dim() const noexcept { return static_cast<int>(coords_.size()); }
  double operator[](std::size_t k) const { return coords_[k]; }
  std::span<const double> coords() const noexcept { return coords_; }

  Point antipode() const {
    Point p = *this;
    for (double& x : p.coords_) x = -x;
    return p;
  }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

/// Writes a uniformly distributed point of S^{d-1} into `out` (size d) by
/// normalizing a vector of independent standard Gaussians.
inline void sample_uniform_sphere_into(std::span<double> out, Stream& rng) {
  detail::require_dimension(static_cast<int>(out.size()));
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& x : out) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (norm2 < 1e-300);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& x : out) x *= inv;
}

inline Point sample_uniform_sphere(int d, Stream& rng) {
  detail::require_dimension(d);
  std::vector<double> v(static_cast<std::size_t>(d));
  sample_uniform_sphere_into(v, rng);
  return Point(std::move(v));
}

/*
 * Normalized surface measure of a geodesic cap of radius r on S^{d-1}:
 *
 *     ∫_0^r sin^{d-2}(t) dt / ∫_0^π sin^{d-2}(t) dt.
 *
 * Closed forms for d = 2 (r/π) and d = 3 (sin²(r/2)). Otherwise, for
 * r <= π/2, the ratio is I_{sin² r}((d-1)/2, 1/2) / 2 (regularized incomplete
 * beta); past π/4 it is evaluated through the complement in cos² r, which
 * stays accurate near the equator. Caps beyond π/2 are reflected.
 */
inline double cap_measure(int d, double r) {
  detail::require_dimension(d);
  if (!(r >= 0.0 && r <= kPi)) {
    throw DomainError("cap radius " + std::to_string(r) + " outside [0, pi]");
  }
  if (d == 2) return r / kPi;
  if (d == 3) {
    const double s = std::sin(0.5 * r);
    return s * s;
  }
  if (r > 0.5 * kPi) return 1.0 - cap_measure(d, kPi - r);
  const double a = 0.5 * (d - 1);
  if (r <= 0.25 * kPi) {
    const double s = std::sin(r);
    return 0.5 * boost::math::ibeta(a, 0.5, s * s);
  }
  const double c = std::cos(r);
  return 0.5 * boost::math::ibetac(0.5, a, c * c);
}

/// Inverse of cap_measure in r: the radius whose cap has measure m.
/// Guarantees |cap_measure(d, r) - m| <= 1e-12 and r <= π/2 when m <= 1/2.
inline double cap_radius_for_measure(int d, double m) {
  detail::require_dimension(d);
  if (!(m > 0.0 && m < 1.0)) {
    throw DomainError("cap measure " + std::to_string(m) + " outside (0, 1)");
  }
  const double cap = m <= 0.5 ? 0.5 * kPi : kPi;
  if (d == 2) return std::min(kPi * m, cap);
  if (d == 3) return std::min(2.0 * std::asin(std::sqrt(m)), cap);

  double lo = m <= 0.5 ? 0.0 : 0.5 * kPi;
  double hi = m <= 0.5 ? 0.5 * kPi : kPi;
  for (int iter = 0; iter < 200 && hi - lo > 1e-16 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (cap_measure(d, mid) < m ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  if (std::abs(cap_measure(d, r) - m) > 1e-12) {
    throw SolverError("cap radius solver did not reach 1e-12 for d=" +
                      std::to_string(d) + ", m=" + std::to_string(m));
  }
  return r;
}

/// Dimension d, cap count N and the derived cap radius r_N with
/// σ(C(x, r_N)) = 1/N. N = 1 gives the whole sphere (r = π).
struct ModelParams {
  int d = 2;
  std::int64_t N = 2;
  double radius = kPi / 2;
  double cos_radius = 0.0;

  static ModelParams make(int d, std::int64_t N) {
    detail::require_dimension(d);
    if (N < 1) throw ParameterError("cap count N must be >= 1");
    ModelParams p;
    p.d = d;
    p.N = N;
    p.radius = N == 1 ? kPi
                      : cap_radius_for_measure(d, 1.0 / static_cast<double>(N));
    p.cos_radius = std::cos(p.radius);
    return p;
  }

  double cap_fraction() const noexcept { return 1.0 / static_cast<double>(N); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Geodesic distance 2 atan2(|x - y|, |x + y|); unlike arccos of the inner
/// product it keeps full precision near 0 and π.
inline double geodesic_distance(std::span<const double> x,
                                std::span<const double> y) {
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    diff += (x[k] - y[k]) * (x[k] - y[k]);
    sum += (x[k] + y[k]) * (x[k] + y[k]);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

inline double geodesic_distance(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw WrongDimension(x.dim(), y.dim());
  return geodesic_distance(x.coords(), y.coords());
}

/// Closed geodesic cap {p : dist(center, p) <= radius}.
struct Cap {
  Point center;
  double radius = 0.0;

  Cap(Point c, double r) : center(std::move(c)), radius(r) {
    if (!(r > 0.0 && r <= kPi)) {
      throw DomainError("cap radius must lie in (0, pi]");
    }
  }

  bool contains(std::span<const double> p) const {
    return detail::dot(center.coords(), p) >= std::cos(radius);
  }
  bool contains(const Point& p) const { return contains(p.coords()); }
};

/// Closed caps intersect iff their centers are within r1 + r2. Compared in
/// cosine space so tangency is decided consistently with cap membership.
inline bool caps_intersect(const Cap& a, const Cap& b) {
  const double reach = a.radius + b.radius;
  if (reach >= kPi) return true;
  return detail::dot(a.center.coords(), b.center.coords()) >= std::cos(reach);
}

}  // namespace spherecover
