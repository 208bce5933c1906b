// Copyright 2026 The meandimlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test dynamical system: the shift on ([0,1]^D)^Z times an irrational circle
// rotation, with a weighted sup product metric and its Bowen metrics.
//
// A point is stored as a base window of cube coordinates indexed by
// [-window_radius, window_radius], a base circle point, and an integer shift
// offset. Shifting only moves the offset, so T^a T^b x and T^(a+b) x are the
// same object bit for bit.

#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "meandimlab/errors.hpp"

namespace meandimlab::dynsys {

inline constexpr const char* kSchema = "dynsys/v1";

// Golden rotation truncated to 12 decimal digits.
inline constexpr double kGoldenTheta = 0.618033988749;
inline constexpr std::int64_t kThetaDenominator = 1'000'000'000'000;
inline constexpr std::int64_t kMinThetaDenominator = 1'000'000;

// Each circle value carries at most this absolute error with respect to the
// exact rational orbit (one rounding of r/q and one of the sum mod 1).
inline constexpr double kRotationErrorBound = 4.5e-16;

// Wraps into [0, 1).
inline double wrap_unit(double c) {
  c -= std::floor(c);
  return c >= 1.0 ? 0.0 : c;
}

// Arc distance on R/Z, in [0, 1/2].
inline double arcdist(double a, double b) {
  const double d = std::fabs(wrap_unit(a) - wrap_unit(b));
  return d > 0.5 ? 1.0 - d : d;
}

// Rotation angle stored as an exact rational num/den in lowest terms.
struct RationalAngle {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static RationalAngle from_double(double theta, std::int64_t den = kThetaDenominator) {
    const auto n = static_cast<std::int64_t>(std::llround(theta * static_cast<double>(den)));
    const std::int64_t g = std::gcd(n, den);
    return {n / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // (k * num) mod den, exact for any 64-bit k.
  std::int64_t residue(std::int64_t k) const {
    std::int64_t kk = k % den;
    if (kk < 0) kk += den;
    return static_cast<std::int64_t>((static_cast<__int128>(kk) * num) % den);
  }

  // Fractional part of k * theta.
  double frac(std::int64_t k) const {
    return static_cast<double>(residue(k)) / static_cast<double>(den);
  }

  // ||k theta||, distance from k * theta to the nearest integer.
  double norm_multiple(std::int64_t k) const {
    const std::int64_t r = residue(k);
    return static_cast<double>(std::min(r, den - r)) / static_cast<double>(den);
  }

  bool operator==(const RationalAngle&) const = default;
};

enum class BaseExtension { kConstantZero, kPeriodic };

inline const char* to_string(BaseExtension e) {
  return e == BaseExtension::kConstantZero ? "constant-zero" : "periodic";
}

inline BaseExtension base_extension_from_string(const std::string& s) {
  if (s == "constant-zero") return BaseExtension::kConstantZero;
  if (s == "periodic") return BaseExtension::kPeriodic;
  throw ConfigError("unknown base_extension '" + s + "'");
}

struct SystemSpec {
  int dim = 1;
  RationalAngle theta = RationalAngle::from_double(kGoldenTheta);
  int window_radius = 64;
  double decay = 0.5;
  BaseExtension extension = BaseExtension::kConstantZero;

  // theta is a rational stand-in for an irrational angle.
  static constexpr bool kThetaApproximate = true;

  static SystemSpec make(int dim, double theta, int window_radius, double decay = 0.5,
                         BaseExtension ext = BaseExtension::kConstantZero) {
    if (!(theta > 0.0 && theta < 1.0)) {
      throw ConfigError("theta must be irrational in (0,1), got " + std::to_string(theta));
    }
    SystemSpec s{dim, RationalAngle::from_double(theta), window_radius, decay, ext};
    s.validate();
    return s;
  }

  void validate() const {
    if (dim < 0) throw ConfigError("D must be nonnegative");
    if (window_radius < 1) throw ConfigError("window_radius must be positive");
    if (!(decay > 0.0 && decay < 1.0)) throw ConfigError("decay must lie in (0,1)");
    if (theta.num <= 0 || theta.num >= theta.den) throw ConfigError("theta must lie in (0,1)");
    if (theta.den < kMinThetaDenominator) {
      throw ConfigError("theta must be irrational: its rational approximation reduces to " +
                        std::to_string(theta.num) + "/" + std::to_string(theta.den));
    }
  }

  bool operator==(const SystemSpec&) const = default;
};

class OrbitWindow {
 public:
  OrbitWindow(SystemSpec spec, std::vector<double> cube_coords, double circle_point)
      : spec_(spec),
        base_(std::make_shared<const std::vector<double>>(std::move(cube_coords))),
        base_circle_(wrap_unit(circle_point)) {
    const std::size_t expect =
        static_cast<std::size_t>(2 * spec_.window_radius + 1) * static_cast<std::size_t>(spec_.dim);
    if (base_->size() != expect) {
      throw ConfigError("cube window has " + std::to_string(base_->size()) + " entries, expected " +
                        std::to_string(expect));
    }
  }

  const SystemSpec& spec() const { return spec_; }
  std::int64_t offset() const { return offset_; }

  double circle() const { return circle_at(0); }

  // Circle coordinate of T^n of this point. Defined for every n: rotation is
  // carried in exact integer residues.
  double circle_at(std::int64_t n) const {
    return wrap_unit(base_circle_ + spec_.theta.frac(offset_ + n));
  }

  // Component `i` of cube coordinate n. Coordinates beyond the stored window
  // follow the base extension rule.
  double cube(std::int64_t n, int i) const {
    const std::int64_t w = spec_.window_radius;
    std::int64_t j = n + offset_;
    if (j < -w || j > w) {
      if (spec_.extension == BaseExtension::kConstantZero) return 0.0;
      const std::int64_t period = 2 * w + 1;
      j = ((j + w) % period + period) % period - w;
    }
    return (*base_)[static_cast<std::size_t>((j + w) * spec_.dim + i)];
  }

  std::span<const double> base_coords() const { return *base_; }
  double base_circle() const { return base_circle_; }

  OrbitWindow with_offset(std::int64_t off) const {
    OrbitWindow out = *this;
    out.offset_ = off;
    return out;
  }

  // Copy of this point's base data with cube coordinate n (relative to this
  // point) replaced. n must lie in the stored window.
  OrbitWindow with_cube(std::int64_t n, int i, double value) const {
    const std::int64_t w = spec_.window_radius;
    const std::int64_t j = n + offset_;
    if (j < -w || j > w) throw RangeError("coordinate outside stored window");
    std::vector<double> coords(base_->begin(), base_->end());
    coords[static_cast<std::size_t>((j + w) * spec_.dim + i)] = value;
    OrbitWindow out(spec_, std::move(coords), base_circle_);
    out.offset_ = offset_;
    return out;
  }

  bool same_data(const OrbitWindow& o) const {
    return spec_ == o.spec_ && offset_ == o.offset_ && base_circle_ == o.base_circle_ &&
           *base_ == *o.base_;
  }

 private:
  SystemSpec spec_;
  std::shared_ptr<const std::vector<double>> base_;
  double base_circle_ = 0.0;
  std::int64_t offset_ = 0;
};

// T^k x. The accumulated offset must stay within the stored window.
inline OrbitWindow apply_shift(const OrbitWindow& x, std::int64_t k) {
  const std::int64_t off = x.offset() + k;
  if (off < -x.spec().window_radius || off > x.spec().window_radius) {
    throw RangeError("shift by " + std::to_string(k) + " exhausts window of radius " +
                     std::to_string(x.spec().window_radius) + " (current offset " +
                     std::to_string(x.offset()) + ")");
  }
  return x.with_offset(off);
}

// d(x,y) = max( sup_n decay^|n| |x_n - y_n|_inf , arcdist(circle_x, circle_y) ).
inline double dist(const OrbitWindow& x, const OrbitWindow& y) {
  if (!(x.spec() == y.spec())) throw ConfigError("dist: points belong to different systems");
  const SystemSpec& s = x.spec();
  double best = arcdist(x.circle(), y.circle());
  if (s.dim == 0) return best;

  // Outside [lo, hi] both points read the constant-zero extension.
  const std::int64_t w = s.window_radius;
  const std::int64_t lo = -w - std::max(x.offset(), y.offset());
  const std::int64_t hi = w - std::min(x.offset(), y.offset());
  const bool periodic = s.extension == BaseExtension::kPeriodic;

  auto coord_gap = [&](std::int64_t n) {
    double g = 0.0;
    for (int i = 0; i < s.dim; ++i) g = std::max(g, std::fabs(x.cube(n, i) - y.cube(n, i)));
    return g;
  };

  double weight = 1.0;
  for (std::int64_t r = 0;; ++r) {
    if (weight <= best || weight < 1e-300) break;
    if (!periodic && -r < lo && r > hi) break;
    double g = 0.0;
    if (periodic || (r >= lo && r <= hi)) g = coord_gap(r);
    if (r > 0 && (periodic || (-r >= lo && -r <= hi))) g = std::max(g, coord_gap(-r));
    best = std::max(best, weight * g);
    weight *= s.decay;
  }
  return best;
}

// d_n(x,y) = max_{0 <= i < n} d(T^i x, T^i y).
inline double bowen_dist(const OrbitWindow& x, const OrbitWindow& y, int n) {
  if (n < 1) throw ConfigError("bowen_dist: horizon must be positive");
  double best = 0.0;
  for (int i = 0; i < n; ++i) best = std::max(best, dist(apply_shift(x, i), apply_shift(y, i)));
  return best;
}

// Uniform double in [0,1) from the top 53 bits; portable across standard
// libraries unlike std::uniform_real_distribution.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::vector<OrbitWindow> sample_points(const SystemSpec& spec, std::size_t count,
                                              std::uint64_t seed) {
  if (count == 0) throw ConfigError("sample_points: count must be at least 1");
  spec.validate();
  std::mt19937_64 rng(seed);
  const std::size_t len =
      static_cast<std::size_t>(2 * spec.window_radius + 1) * static_cast<std::size_t>(spec.dim);
  std::vector<OrbitWindow> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<double> coords(len);
    for (double& c : coords) c = unit_draw(rng);
    const double circle = unit_draw(rng);
    out.emplace_back(spec, std::move(coords), circle);
  }
  return out;
}

// A point with every cube coordinate equal to `fill`.
inline OrbitWindow constant_point(const SystemSpec& spec, double circle, double fill = 0.5) {
  std::vector<double> coords(
      static_cast<std::size_t>(2 * spec.window_radius + 1) * static_cast<std::size_t>(spec.dim), fill);
  return OrbitWindow(spec, std::move(coords), circle);
}

inline nlohmann::json to_json(const SystemSpec& s) {
  return {{"schema", kSchema},
          {"D", s.dim},
          {"theta", s.theta.value()},
          {"theta_num", s.theta.num},
          {"theta_den", s.theta.den},
          {"theta_approximate", SystemSpec::kThetaApproximate},
          {"window_radius", s.window_radius},
          {"decay", s.decay},
          {"base_extension", to_string(s.extension)}};
}

inline SystemSpec system_spec_from_json(const nlohmann::json& j) {
  if (j.contains("schema") && j.at("schema") != kSchema) {
    throw ConfigError("unsupported system schema " + j.at("schema").dump());
  }
  SystemSpec s;
  s.dim = j.value("D", 1);
  s.window_radius = j.value("window_radius", 64);
  s.decay = j.value("decay", 0.5);
  s.extension = base_extension_from_string(j.value("base_extension", std::string("constant-zero")));
  if (j.contains("theta_num") && j.contains("theta_den")) {
    const std::int64_t n = j.at("theta_num");
    const std::int64_t d = j.at("theta_den");
    const std::int64_t g = std::gcd(n, d);
    s.theta = {n / g, d / g};
  } else {
    const double theta = j.value("theta", kGoldenTheta);
    if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
    s.theta = RationalAngle::from_double(theta);
  }
  s.validate();
  return s;
}

}  // namespace meandimlab::dynsys
