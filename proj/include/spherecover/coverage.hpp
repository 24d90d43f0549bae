#pragma once

// Covered volume V_N = σ(∪ C_N(X_i)) of a cap configuration, exactly on the
// circle and by Monte Carlo in any dimension, plus the replacement
// differences Δ_i f and Δ_{i,j} f over recombinations of three copies.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spherecover/errors.hpp"
#include "spherecover/random.hpp"
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/discrete_distribution.hpp>

#include "spherecover/sphere.hpp"

namespace spherecover {

/// N cap centers sharing one ModelParams, stored row-major (N x d).
class CapConfiguration {
 public:
  CapConfiguration(const ModelParams& params, std::vector<double> flat_centers)
      : params_(params), centers_(std::move(flat_centers)) {
    const auto d = static_cast<std::size_t>(params_.d);
    if (centers_.size() != d * static_cast<std::size_t>(params_.N)) {
      throw ParameterError("configuration needs exactly N centers of dimension d");
    }
    for (std::int64_t i = 0; i < size(); ++i) {
      const auto c = center(i);
      const double norm = std::sqrt(detail::dot(c, c));
      if (std::abs(norm - 1.0) > 1e-12) {
        throw DomainError("cap center " + std::to_string(i) + " is not unit norm");
      }
    }
  }

  static CapConfiguration from_points(const ModelParams& params,
                                      std::span<const Point> points) {
    std::vector<double> flat;
    flat.reserve(points.size() * static_cast<std::size_t>(params.d));
    for (const Point& p : points) {
      if (p.dim() != params.d) throw WrongDimension(params.d, p.dim());
      flat.insert(flat.end(), p.coords().begin(), p.coords().end());
    }
    return CapConfiguration(params, std::move(flat));
  }

  /// Circle configuration from polar angles (d = 2).
  static CapConfiguration from_angles(const ModelParams& params,
                                      std::span<const double> angles) {
    if (params.d != 2) throw WrongDimension(2, params.d);
    std::vector<double> flat;
    flat.reserve(2 * angles.size());
    for (double t : angles) {
      flat.push_back(std::cos(t));
      flat.push_back(std::sin(t));
    }
    return CapConfiguration(params, std::move(flat));
  }

  /// N independent σ-distributed centers.
  static CapConfiguration sample(const ModelParams& params, Stream& rng) {
    const auto d = static_cast<std::size_t>(params.d);
    std::vector<double> flat(d * static_cast<std::size_t>(params.N));
    for (std::size_t i = 0; i < static_cast<std::size_t>(params.N); ++i) {
      sample_uniform_sphere_into(std::span<double>(flat).subspan(i * d, d), rng);
    }
    CapConfiguration c;
    c.params_ = params;
    c.centers_ = std::move(flat);
    return c;
  }

  const ModelParams& params() const noexcept { return params_; }
  int dim() const noexcept { return params_.d; }
  std::int64_t size() const noexcept { return params_.N; }

  std::span<const double> center(std::int64_t i) const noexcept {
    const auto d = static_cast<std::size_t>(params_.d);
    return std::span<const double>(centers_).subspan(static_cast<std::size_t>(i) * d, d);
  }
  std::span<const double> flat() const noexcept { return centers_; }

  void set_center(std::int64_t i, std::span<const double> c) {
    std::copy(c.begin(), c.end(),
              centers_.begin() + static_cast<std::ptrdiff_t>(i * params_.d));
  }

  /// Same configuration with the centers permuted: result[k] = this[perm[k]].
  CapConfiguration permuted(std::span<const std::int64_t> perm) const {
    CapConfiguration out = *this;
    for (std::size_t k = 0; k < perm.size(); ++k) {
      out.set_center(static_cast<std::int64_t>(k), center(perm[k]));
    }
    return out;
  }

 private:
  CapConfiguration() = default;

  ModelParams params_;
  std::vector<double> centers_;
};

/// Which of the three independent copies a recombination coordinate uses.
enum class Source : std::uint8_t { base = 0, primed = 1, tilde = 2 };

/*
 * Three independent configurations X, X', X~ plus a selector that picks, per
 * coordinate, which copy the recombination Z uses. Replacement vectors
 * Z^{i} and Z^{i,j} always substitute the primed copy X'_i (X'_j).
 *
 * Coordinates are 0-based in this API.
 */
class ReplacementScheme {
 public:
  ReplacementScheme(CapConfiguration base, CapConfiguration primed,
                    CapConfiguration tilde, std::vector<Source> selector)
      : copies_{std::move(base), std::move(primed), std::move(tilde)} {
    const ModelParams& p = copies_[0].params();
    if (!(copies_[1].params() == p && copies_[2].params() == p)) {
      throw ParameterError("all copies of a replacement scheme must share ModelParams");
    }
    set_selector(std::move(selector));
  }

  /// Three independent σ-distributed copies; selector defaults to Z = X.
  static ReplacementScheme sample(const ModelParams& params, Stream& rng) {
    auto x = CapConfiguration::sample(params, rng);
    auto xp = CapConfiguration::sample(params, rng);
    auto xt = CapConfiguration::sample(params, rng);
    return ReplacementScheme(std::move(x), std::move(xp), std::move(xt),
                             std::vector<Source>(static_cast<std::size_t>(params.N),
                                                 Source::base));
  }

  void set_selector(std::vector<Source> selector) {
    if (selector.size() != static_cast<std::size_t>(params().N)) {
      throw ParameterError("selector length must equal N");
    }
    selector_ = std::move(selector);
  }

  const ModelParams& params() const noexcept { return copies_[0].params(); }
  const CapConfiguration& copy(Source s) const noexcept {
    return copies_[static_cast<std::size_t>(s)];
  }
  const CapConfiguration& base() const noexcept { return copies_[0]; }
  const CapConfiguration& primed() const noexcept { return copies_[1]; }
  const CapConfiguration& tilde() const noexcept { return copies_[2]; }
  std::span<const Source> selector() const noexcept { return selector_; }

  /// Center of Z at coordinate i.
  std::span<const double> z_center(std::int64_t i) const noexcept {
    return copy(selector_[static_cast<std::size_t>(i)]).center(i);
  }

  /// The recombination Z.
  CapConfiguration recombination() const { return replaced({}); }

  /// Z with every coordinate in `coords` replaced by the primed copy.
  CapConfiguration replaced(std::initializer_list<std::int64_t> coords) const {
    CapConfiguration z = base();
    for (std::int64_t i = 0; i < params().N; ++i) {
      if (selector_[static_cast<std::size_t>(i)] != Source::base) {
        z.set_center(i, z_center(i));
      }
    }
    for (std::int64_t i : coords) z.set_center(i, primed().center(i));
    return z;
  }

 private:
  std::array<CapConfiguration, 3> copies_;
  std::vector<Source> selector_;
};

struct CoverageValue {
  enum class Kind { exact, monte_carlo };

  double value = 0.0;
  Kind kind = Kind::exact;
  std::int64_t mc_points = 0;  // 0 when exact
  std::int64_t mc_hits = 0;
};

/*
 * Exact covered length on the circle. Each cap is the arc
 * [θ_i - r, θ_i + r]; arcs crossing angle 0 are split in two, then the arcs
 * are sorted and merged in one sweep. Returns merged length / 2π.
 */
inline CoverageValue covered_volume_exact_d2(const CapConfiguration& config) {
  if (config.dim() != 2) throw WrongDimension(2, config.dim());
  constexpr double two_pi = 2.0 * kPi;
  const double r = config.params().radius;
  if (2.0 * r >= two_pi) return {1.0, CoverageValue::Kind::exact, 0, 0};

  std::vector<std::pair<double, double>> arcs;
  arcs.reserve(2 * static_cast<std::size_t>(config.size()));
  for (std::int64_t i = 0; i < config.size(); ++i) {
    const auto c = config.center(i);
    double start = std::atan2(c[1], c[0]) - r;
    start = std::fmod(start, two_pi);
    if (start < 0.0) start += two_pi;
    if (start >= two_pi) start = 0.0;
    const double end = start + 2.0 * r;
    if (end > two_pi) {
      arcs.emplace_back(start, two_pi);
      arcs.emplace_back(0.0, end - two_pi);
    } else {
      arcs.emplace_back(start, end);
    }
  }
  std::sort(arcs.begin(), arcs.end());

  double total = 0.0;
  double run_start = arcs.front().first;
  double run_end = arcs.front().second;
  for (std::size_t k = 1; k < arcs.size(); ++k) {
    if (arcs[k].first <= run_end) {
      run_end = std::max(run_end, arcs[k].second);
    } else {
      total += run_end - run_start;
      run_start = arcs[k].first;
      run_end = arcs[k].second;
    }
  }
  total += run_end - run_start;
  return {std::min(1.0, total / two_pi), CoverageValue::Kind::exact, 0, 0};
}

/// Brute-force membership: max_i <p, X_i> >= cos r_N.
inline bool covered_brute_force(const CapConfiguration& config,
                                std::span<const double> p) {
  const double threshold = config.params().cos_radius;
  const auto d = static_cast<std::size_t>(config.dim());
  const double* c = config.flat().data();
  for (std::int64_t i = 0; i < config.size(); ++i, c += d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += c[k] * p[k];
    if (s >= threshold) return true;
  }
  return false;
}

/// Bucketed arc lookup for d = 2: a query angle only visits the caps whose
/// arcs overlap its bucket.
class CircleIndex {
 public:
  void assign(const CapConfiguration& config) {
    if (config.dim() != 2) throw WrongDimension(2, config.dim());
    radius_ = config.params().radius;
    buckets_ = static_cast<std::size_t>(std::max<std::int64_t>(1, config.size()));
    const double width = 2.0 * kPi / static_cast<double>(buckets_);

    std::vector<std::pair<std::size_t, double>> entries;
    for (std::int64_t i = 0; i < config.size(); ++i) {
      const auto c = config.center(i);
      double theta = std::atan2(c[1], c[0]);
      if (theta < 0.0) theta += 2.0 * kPi;
      if (2.0 * radius_ >= kPi) {
        for (std::size_t b = 0; b < buckets_; ++b) entries.emplace_back(b, theta);
        continue;
      }
      const auto first = static_cast<std::int64_t>(std::floor((theta - radius_) / width)) - 1;
      const auto last = static_cast<std::int64_t>(std::floor((theta + radius_) / width)) + 1;
      const auto nb = static_cast<std::int64_t>(buckets_);
      for (std::int64_t b = first; b <= last && b - first < nb; ++b) {
        entries.emplace_back(static_cast<std::size_t>(((b % nb) + nb) % nb), theta);
      }
    }
    offsets_.assign(buckets_ + 1, 0);
    for (const auto& e : entries) ++offsets_[e.first + 1];
    for (std::size_t b = 0; b < buckets_; ++b) offsets_[b + 1] += offsets_[b];
    angles_.resize(entries.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : entries) angles_[fill[e.first]++] = e.second;
    scale_ = static_cast<double>(buckets_) / (2.0 * kPi);
  }

  /// `phi` in [0, 2π).
  bool covers(double phi) const noexcept {
    const auto b = std::min(buckets_ - 1, static_cast<std::size_t>(phi * scale_));
    for (std::size_t k = offsets_[b]; k < offsets_[b + 1]; ++k) {
      double delta = std::abs(phi - angles_[k]);
      if (delta > kPi) delta = 2.0 * kPi - delta;
      if (delta <= radius_) return true;
    }
    return false;
  }

 private:
  double radius_ = 0.0;
  double scale_ = 1.0;
  std::size_t buckets_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<double> angles_;
};

/*
 * Cube-map spatial index on S^2. Each of the 6 cube faces carries a G x G grid
 * in gnomonic coordinates, with cells about a third of the cap radius across.
 * Cell geometry (center direction, circumradius, adjacency) depends only on
 * the cap radius and is built once; assign() then walks breadth-first from the
 * cell holding each cap center. A cell X meets the cap with center c only if
 * dist(center_X, c) <= r + radius_X; such cells either lie entirely inside the
 * cap (dist <= r - radius_X, marked full) or get the cap added to their member
 * list. A query then costs one cell lookup plus a scan of a few members.
 *
 * count_hits() draws the number of M uniform points that land in the union
 * without placing most of them: the counts falling in full, mixed and empty
 * cells are multinomial with the region areas as probabilities, and only the
 * points of mixed cells are generated (cell by area, then uniformly inside the
 * cell) and tested. The hit count has the same law as testing M independent
 * uniform points.
 */
class CubeMapIndex {
 public:
  static constexpr int kCellsPerRadius = 3;
  static constexpr int kMaxGrid = 400;

  explicit CubeMapIndex(double cap_radius) : cos_r_(std::cos(cap_radius)) {
    grid_ = std::clamp(
        static_cast<int>(std::ceil(kCellsPerRadius * 0.5 * kPi / cap_radius)), 1, kMaxGrid);
    half_grid_ = 0.5 * grid_;
    const auto cells = static_cast<std::size_t>(6 * grid_ * grid_);
    center_.resize(cells);
    reach_cos_.resize(cells);
    full_cos_.resize(cells);
    area_.resize(cells);
    density_max_.resize(cells);
    adjacency_.resize(cells);
    const double h = 2.0 / grid_;
    for (int f = 0; f < 6; ++f) {
      for (int iu = 0; iu < grid_; ++iu) {
        for (int iv = 0; iv < grid_; ++iv) {
          const std::size_t id = cell_id(f, iu, iv);
          const double u0 = -1.0 + iu * h;
          const double v0 = -1.0 + iv * h;
          center_[id] = direction(f, u0 + 0.5 * h, v0 + 0.5 * h);
          area_[id] = (solid_angle(u0 + h, v0 + h) - solid_angle(u0, v0 + h) -
                       solid_angle(u0 + h, v0) + solid_angle(u0, v0)) /
                      (4.0 * kPi);
          const double un = std::clamp(0.0, u0, u0 + h);
          const double vn = std::clamp(0.0, v0, v0 + h);
          density_max_[id] = density(un, vn);
          // The farthest point of a cell from its center is a corner.
          double max_angle = 0.0;
          for (int a = 0; a <= 1; ++a) {
            for (int b = 0; b <= 1; ++b) {
              const auto q = direction(f, u0 + a * h, v0 + b * h);
              max_angle = std::max(max_angle, angle(center_[id], q));
            }
          }
          const double slack = max_angle * (1.0 + 1e-9) + 1e-12;
          const double reach = cap_radius + slack;
          reach_cos_[id] = reach >= kPi ? -2.0 : std::cos(reach);
          const double inner = cap_radius - slack;
          full_cos_[id] = inner > 0.0 ? std::cos(inner) : 2.0;
          const double eps = 1e-7 * h;
          std::size_t n = 0;
          for (int a = -1; a <= 1; ++a) {
            for (int b = -1; b <= 1; ++b) {
              if (a == 0 && b == 0) continue;
              const double u = a < 0 ? u0 - eps : (a > 0 ? u0 + h + eps : u0 + 0.5 * h);
              const double v = b < 0 ? v0 - eps : (b > 0 ? v0 + h + eps : v0 + 0.5 * h);
              adjacency_[id][n++] = static_cast<std::uint32_t>(lookup(direction(f, u, v).data()));
            }
          }
        }
      }
    }
    stamp_.assign(cells, 0);
    full_.assign(cells, 0);
    offsets_.assign(cells + 1, 0);
  }

  int grid() const noexcept { return grid_; }
  std::size_t cell_count() const noexcept { return center_.size(); }

  void assign(const CapConfiguration& config) {
    if (config.dim() != 3) throw WrongDimension(3, config.dim());
    pairs_.clear();
    std::fill(full_.begin(), full_.end(), std::uint8_t{0});
    for (std::int64_t i = 0; i < config.size(); ++i) {
      const double* c = config.center(i).data();
      if (++epoch_ == 0) {
        std::fill(stamp_.begin(), stamp_.end(), 0);
        epoch_ = 1;
      }
      queue_.clear();
      const auto home = static_cast<std::uint32_t>(lookup(c));
      stamp_[home] = epoch_;
      queue_.push_back(home);
      for (std::size_t head = 0; head < queue_.size(); ++head) {
        const std::uint32_t cell = queue_[head];
        const auto& m = center_[cell];
        const double cosine = m[0] * c[0] + m[1] * c[1] + m[2] * c[2];
        if (cosine < reach_cos_[cell]) continue;
        if (cosine >= full_cos_[cell]) {
          full_[cell] = 1;
        } else {
          pairs_.push_back({cell, {c[0], c[1], c[2]}});
        }
        for (std::uint32_t next : adjacency_[cell]) {
          if (stamp_[next] != epoch_) {
            stamp_[next] = epoch_;
            queue_.push_back(next);
          }
        }
      }
    }
    std::fill(offsets_.begin(), offsets_.end(), 0u);
    for (const auto& p : pairs_) {
      if (!full_[p.cell]) ++offsets_[p.cell + 1];
    }
    for (std::size_t k = 0; k < cell_count(); ++k) offsets_[k + 1] += offsets_[k];
    members_.resize(3 * static_cast<std::size_t>(offsets_.back()));
    fill_.assign(offsets_.begin(), offsets_.end() - 1);
    for (const auto& p : pairs_) {
      if (full_[p.cell]) continue;
      const std::size_t slot = fill_[p.cell]++;
      std::copy(p.xyz.begin(), p.xyz.end(), members_.begin() + static_cast<std::ptrdiff_t>(3 * slot));
    }

    full_area_ = 0.0;
    mixed_area_ = 0.0;
    mixed_cells_.clear();
    mixed_weights_.clear();
    for (std::size_t k = 0; k < cell_count(); ++k) {
      if (full_[k]) {
        full_area_ += area_[k];
      } else if (offsets_[k + 1] > offsets_[k]) {
        mixed_area_ += area_[k];
        mixed_cells_.push_back(static_cast<std::uint32_t>(k));
        mixed_weights_.push_back(area_[k]);
      }
    }
    if (!mixed_cells_.empty()) {
      pick_mixed_ = boost::random::discrete_distribution<std::uint32_t, double>(
          mixed_weights_.begin(), mixed_weights_.end());
    }
  }

  /// Number of M independent uniform points covered by the assigned caps.
  std::int64_t count_hits(std::int64_t points, Stream& rng) {
    const std::int64_t in_full = binomial(points, full_area_, rng);
    const double rest = 1.0 - full_area_;
    const std::int64_t in_mixed =
        mixed_cells_.empty() || rest <= 0.0
            ? 0
            : binomial(points - in_full, std::min(1.0, mixed_area_ / rest), rng);
    std::int64_t hits = in_full;
    std::array<double, 3> p{};
    for (std::int64_t k = 0; k < in_mixed; ++k) {
      const std::uint32_t cell = mixed_cells_[pick_mixed_(rng)];
      sample_in_cell(cell, p, rng);
      hits += scan(cell, p.data()) ? 1 : 0;
    }
    return hits;
  }

  bool covers(const double* p) const noexcept {
    const std::size_t cell = lookup(p);
    return full_[cell] || scan(cell, p);
  }

  /// Fraction of the sphere in cells marked fully covered / partly covered.
  double full_area() const noexcept { return full_area_; }
  double mixed_area() const noexcept { return mixed_area_; }
  double cell_area(std::size_t cell) const noexcept { return area_[cell]; }

  /// Uniform point of S^2 conditioned on lying in `cell`: a uniform point of
  /// the cell's gnomonic square, accepted with probability proportional to the
  /// area element (1 + u² + v²)^{-3/2}.
  void sample_in_cell(std::size_t cell, std::array<double, 3>& p, Stream& rng) const noexcept {
    const int gg = grid_ * grid_;
    const int face = static_cast<int>(cell) / gg;
    const int iu = (static_cast<int>(cell) % gg) / grid_;
    const int iv = static_cast<int>(cell) % grid_;
    const double h = 2.0 / grid_;
    const double u0 = -1.0 + iu * h;
    const double v0 = -1.0 + iv * h;
    double u = 0.0;
    double v = 0.0;
    double q = 0.0;
    while (true) {
      const std::uint64_t w = rng();
      u = u0 + h * (static_cast<double>(w >> 32) * 0x1.0p-32);
      v = v0 + h * (static_cast<double>(w & 0xFFFFFFFFu) * 0x1.0p-32);
      q = 1.0 + u * u + v * v;
      const double dens = 1.0 / (q * std::sqrt(q));
      if (dens >= density_max_[cell] || rng.uniform01() * density_max_[cell] < dens) break;
    }
    const double inv = 1.0 / std::sqrt(q);
    const int axis = face / 2;
    static constexpr int kFirst[3] = {1, 2, 0};
    static constexpr int kSecond[3] = {2, 0, 1};
    p[static_cast<std::size_t>(axis)] = (face % 2 == 0 ? 1.0 : -1.0) * inv;
    p[static_cast<std::size_t>(kFirst[axis])] = u * inv;
    p[static_cast<std::size_t>(kSecond[axis])] = v * inv;
  }

 private:
  bool scan(std::size_t cell, const double* p) const noexcept {
    const double* m = members_.data() + 3 * static_cast<std::size_t>(offsets_[cell]);
    const double* end = members_.data() + 3 * static_cast<std::size_t>(offsets_[cell + 1]);
    for (; m != end; m += 3) {
      if (m[0] * p[0] + m[1] * p[1] + m[2] * p[2] >= cos_r_) return true;
    }
    return false;
  }

  static std::int64_t binomial(std::int64_t n, double prob, Stream& rng) {
    if (n <= 0 || prob <= 0.0) return 0;
    if (prob >= 1.0) return n;
    return boost::random::binomial_distribution<std::int64_t, double>(n, prob)(rng);
  }

  // Spherical area element of the gnomonic face coordinates.
  static double density(double u, double v) {
    const double q = 1.0 + u * u + v * v;
    return 1.0 / (q * std::sqrt(q));
  }

  // Solid angle of the gnomonic rectangle [0, u] x [0, v] (signed).
  static double solid_angle(double u, double v) {
    return std::atan(u * v / std::sqrt(1.0 + u * u + v * v));
  }

 public:
  /// Cell containing the direction p (need not be normalized).
  std::size_t lookup(const double* p) const noexcept {
    static constexpr int kFirst[3] = {1, 2, 0};
    static constexpr int kSecond[3] = {2, 0, 1};
    const double ax = std::abs(p[0]);
    const double ay = std::abs(p[1]);
    const double az = std::abs(p[2]);
    const int axis = (az > ax && az > ay) ? 2 : (ay > ax ? 1 : 0);
    const double major = p[axis];
    const int face = 2 * axis + (major < 0.0 ? 1 : 0);
    const double inv = 1.0 / std::abs(major);
    const double u = p[kFirst[axis]] * inv;
    const double v = p[kSecond[axis]] * inv;
    return cell_id(face, to_index(u), to_index(v));
  }

 private:
  struct Pair {
    std::uint32_t cell;
    std::array<double, 3> xyz;
  };

  std::size_t cell_id(int face, int iu, int iv) const noexcept {
    return static_cast<std::size_t>((face * grid_ + iu) * grid_ + iv);
  }

  int to_index(double u) const noexcept {
    const int k = static_cast<int>((u + 1.0) * half_grid_);
    return std::min(std::max(k, 0), grid_ - 1);
  }

  static std::array<double, 3> direction(int face, double u, double v) {
    const int axis = face / 2;
    std::array<double, 3> p{};
    p[static_cast<std::size_t>(axis)] = (face % 2 == 0) ? 1.0 : -1.0;
    p[static_cast<std::size_t>((axis + 1) % 3)] = u;
    p[static_cast<std::size_t>((axis + 2) % 3)] = v;
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (double& x : p) x /= n;
    return p;
  }

  static double angle(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::acos(std::clamp(a[0] * b[0] + a[1] * b[1] + a[2] * b[2], -1.0, 1.0));
  }

  double cos_r_;
  int grid_ = 1;
  double half_grid_ = 0.5;
  std::vector<std::array<double, 3>> center_;
  std::vector<double> reach_cos_;
  std::vector<double> full_cos_;
  std::vector<double> area_;
  std::vector<double> density_max_;
  std::vector<std::array<std::uint32_t, 8>> adjacency_;

  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> queue_;
  std::vector<Pair> pairs_;
  std::vector<std::uint8_t> full_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> fill_;
  std::vector<double> members_;
  double full_area_ = 0.0;
  double mixed_area_ = 0.0;
  std::vector<std::uint32_t> mixed_cells_;
  std::vector<double> mixed_weights_;
  boost::random::discrete_distribution<std::uint32_t, double> pick_mixed_;
};

/*
 * Monte Carlo estimator of V_N: the fraction of M independent uniform points
 * covered by the configuration. Conditionally on the configuration the hit
 * count is Binomial(M, V_N).
 *
 * The kernel is chosen by dimension. d = 2 draws uniform angles against a
 * CircleIndex, d = 3 counts hits with CubeMapIndex::count_hits, and d >= 4 normalizes Gaussian vectors and scans all centers.
 * One estimator object holds the per-radius index geometry and is meant to be
 * reused across configurations with the same ModelParams (not thread-safe;
 * use one per worker).
 */
class MonteCarloCoverage {
 public:
  explicit MonteCarloCoverage(const ModelParams& params) : params_(params) {
    if (params_.d == 3) cube_.emplace_back(params_.radius);
  }

  CoverageValue estimate(const CapConfiguration& config, std::int64_t points,
                         Stream& rng) {
    if (points < 1) throw ParameterError("Monte Carlo sample count M must be >= 1");
    if (!(config.params() == params_)) {
      throw ParameterError("configuration does not match estimator parameters");
    }
    std::int64_t hits = 0;
    if (params_.N == 1) {
      hits = points;
    } else if (params_.d == 2) {
      circle_.assign(config);
      for (std::int64_t k = 0; k < points; ++k) {
        hits += circle_.covers(2.0 * kPi * rng.uniform01()) ? 1 : 0;
      }
    } else if (params_.d == 3) {
      CubeMapIndex& index = cube_.front();
      index.assign(config);
      hits = index.count_hits(points, rng);
    } else {
      buffer_.resize(static_cast<std::size_t>(params_.d));
      for (std::int64_t k = 0; k < points; ++k) {
        sample_uniform_sphere_into(buffer_, rng);
        hits += covered_brute_force(config, buffer_) ? 1 : 0;
      }
    }
    return {static_cast<double>(hits) / static_cast<double>(points),
            CoverageValue::Kind::monte_carlo, points, hits};
  }

  /// Uniform point on S^2 from a uniform point (x, y) of the unit disk. Both
  /// coordinates come from one 64-bit draw (32 bits each).
  static void sample_s2(std::array<double, 3>& p, Stream& rng) noexcept {
    double x = 0.0;
    double y = 0.0;
    double s = 0.0;
    do {
      const std::uint64_t w = rng();
      x = static_cast<double>(static_cast<std::int32_t>(w >> 32)) * 0x1.0p-31;
      y = static_cast<double>(static_cast<std::int32_t>(w & 0xFFFFFFFFu)) * 0x1.0p-31;
      s = x * x + y * y;
    } while (s >= 1.0);
    const double t = 2.0 * std::sqrt(1.0 - s);
    p = {x * t, y * t, 1.0 - 2.0 * s};
  }

 private:
  ModelParams params_;
  CircleIndex circle_;
  std::vector<CubeMapIndex> cube_;
  std::vector<double> buffer_;
};

inline CoverageValue covered_volume_mc(const CapConfiguration& config,
                                       std::int64_t points, Stream& rng) {
  MonteCarloCoverage mc(config.params());
  return mc.estimate(config, points, rng);
}

/// Fixed set of M uniform points shared by several union evaluations
/// (common random points).
class PointSet {
 public:
  static PointSet sample(int d, std::int64_t points, Stream& rng) {
    if (points < 1) throw ParameterError("point set size must be >= 1");
    PointSet s;
    s.d_ = d;
    s.coords_.resize(static_cast<std::size_t>(d) * static_cast<std::size_t>(points));
    for (std::int64_t k = 0; k < points; ++k) {
      sample_uniform_sphere_into(s.point_span(k), rng);
    }
    return s;
  }

  int dim() const noexcept { return d_; }
  std::int64_t size() const noexcept {
    return static_cast<std::int64_t>(coords_.size()) / d_;
  }
  std::span<const double> point(std::int64_t k) const noexcept {
    return std::span<const double>(coords_).subspan(
        static_cast<std::size_t>(k) * static_cast<std::size_t>(d_),
        static_cast<std::size_t>(d_));
  }

 private:
  std::span<double> point_span(std::int64_t k) noexcept {
    return std::span<double>(coords_).subspan(
        static_cast<std::size_t>(k) * static_cast<std::size_t>(d_),
        static_cast<std::size_t>(d_));
  }

  int d_ = 2;
  std::vector<double> coords_;
};

/// Coverage evaluators: callables mapping a configuration to its covered
/// fraction.
template <class F>
concept CoverageEvaluator = std::invocable<F&, const CapConfiguration&> &&
    std::convertible_to<std::invoke_result_t<F&, const CapConfiguration&>, double>;

struct ExactD2Evaluator {
  double operator()(const CapConfiguration& c) const {
    return covered_volume_exact_d2(c).value;
  }
};

/// Empirical measure of the union on a shared point set. Differences of such
/// evaluations are exact on the sampled set.
struct SharedPointsEvaluator {
  const PointSet* points = nullptr;

  double operator()(const CapConfiguration& c) const {
    if (points->dim() != c.dim()) throw WrongDimension(c.dim(), points->dim());
    std::int64_t hits = 0;
    for (std::int64_t k = 0; k < points->size(); ++k) {
      hits += covered_brute_force(c, points->point(k)) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(points->size());
  }
};

/// Δ_i f(Z) = f(Z) - f(Z^{i}).
template <CoverageEvaluator F>
double replacement_difference(const ReplacementScheme& scheme, std::int64_t i,
                              F&& volume) {
  if (i < 0 || i >= scheme.params().N) throw ParameterError("coordinate out of range");
  if (scheme.selector()[static_cast<std::size_t>(i)] == Source::primed) return 0.0;
  return volume(scheme.recombination()) - volume(scheme.replaced({i}));
}

/// Δ_1 f(Z): replacement of the first coordinate (index 0).
template <CoverageEvaluator F>
double delta1(const ReplacementScheme& scheme, F&& volume) {
  return replacement_difference(scheme, 0, std::forward<F>(volume));
}

/// Δ_{i,j} f(Z) = f(Z) - f(Z^{i}) - f(Z^{j}) + f(Z^{i,j}).
template <CoverageEvaluator F>
double delta12(const ReplacementScheme& scheme, std::int64_t i, std::int64_t j,
               F&& volume) {
  const std::int64_t n = scheme.params().N;
  if (i == j) throw ParameterError("second replacement difference needs i != j");
  if (i < 0 || j < 0 || i >= n || j >= n) throw ParameterError("coordinate out of range");
  const auto sel = scheme.selector();
  if (sel[static_cast<std::size_t>(i)] == Source::primed ||
      sel[static_cast<std::size_t>(j)] == Source::primed) {
    return 0.0;
  }
  return volume(scheme.recombination()) - volume(scheme.replaced({i})) -
         volume(scheme.replaced({j})) + volume(scheme.replaced({i, j}));
}

/// True iff the caps C(Z_i), C(X'_i), C(Z_j), C(X'_j) are pairwise disjoint,
/// identical caps (Z_i = X'_i) counted once.
inline bool relevant_caps_disjoint(const ReplacementScheme& scheme, std::int64_t i,
                                   std::int64_t j) {
  std::vector<std::span<const double>> caps;
  auto add = [&](std::span<const double> c, bool duplicate) {
    if (!duplicate) caps.push_back(c);
  };
  const auto sel = scheme.selector();
  add(scheme.z_center(i), false);
  add(scheme.primed().center(i), sel[static_cast<std::size_t>(i)] == Source::primed);
  add(scheme.z_center(j), false);
  add(scheme.primed().center(j), sel[static_cast<std::size_t>(j)] == Source::primed);
  const double reach = 2.0 * scheme.params().radius;
  if (reach >= kPi) return caps.size() <= 1;
  const double threshold = std::cos(reach);
  for (std::size_t a = 0; a < caps.size(); ++a) {
    for (std::size_t b = a + 1; b < caps.size(); ++b) {
      if (detail::dot(caps[a], caps[b]) >= threshold) return false;
    }
  }
  return true;
}

}  // namespace spherecover
