// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace sik {

inline constexpr std::string_view kVersion = "0.1.0";

/// Flat array of real coefficients. Houses signals, observations and
/// gradients; length is fixed per problem instance.
using SignalVector = std::vector<double>;

/// Thrown when a debugging/oracle facility would exceed its memory cap.
class resource_limit_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

/// Neumaier compensated summation. Error stays O(eps) independent of length,
/// which keeps simplex-sum checks meaningful at image scale.
inline double sum(std::span<const double> v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  return s + c;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

/// Seeded random source with hand-rolled scalings.
///
/// mt19937_64 output is bit-specified by the standard; the uniform and
/// Gaussian mappings below are explicit so that streams do not depend on a
/// toolchain's distribution internals. Gaussian draws use the Marsaglia
/// polar method, so reproducibility across machines is limited only by the
/// platform's log/sqrt rounding.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  std::uint64_t raw() { return gen_(); }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sik
