// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "sik/common.hpp"

namespace sik {

enum class Boundary { zero_pad, replicate, circular };

inline std::string_view to_string(Boundary b) {
  switch (b) {
    case Boundary::zero_pad: return "zero_pad";
    case Boundary::replicate: return "replicate";
    case Boundary::circular: return "circular";
  }
  return "?";
}

/// Matrix-free linear map with an explicit adjoint.
///
/// Instances are immutable after construction and safe to share between
/// concurrent solver runs; the wrapped callables must be re-entrant.
class LinearOperator {
public:
  using Apply = std::function<SignalVector(const SignalVector&)>;

  LinearOperator() = default;
  LinearOperator(std::size_t in_dim, std::size_t out_dim, Apply fwd, Apply adj)
      : in_dim_(in_dim), out_dim_(out_dim), fwd_(std::move(fwd)), adj_(std::move(adj)) {
    if (in_dim_ == 0 || out_dim_ == 0) {
      throw std::invalid_argument("LinearOperator: dimensions must be positive");
    }
  }

  SignalVector forward(const SignalVector& u) const {
    if (u.size() != in_dim_) {
      throw std::invalid_argument("LinearOperator::forward: expected length " +
                                  std::to_string(in_dim_) + ", got " + std::to_string(u.size()));
    }
    return fwd_(u);
  }

  SignalVector adjoint(const SignalVector& v) const {
    if (v.size() != out_dim_) {
      throw std::invalid_argument("LinearOperator::adjoint: expected length " +
                                  std::to_string(out_dim_) + ", got " + std::to_string(v.size()));
    }
    return adj_(v);
  }

  std::size_t in_dim() const noexcept { return in_dim_; }
  std::size_t out_dim() const noexcept { return out_dim_; }

private:
  std::size_t in_dim_ = 0;
  std::size_t out_dim_ = 0;
  Apply fwd_, adj_;
};

inline LinearOperator identity_operator(std::size_t n) {
  auto id = [](const SignalVector& u) { return u; };
  return LinearOperator(n, n, id, id);
}

/// Wraps a row-major rows x cols matrix as an operator. Used by tests and
/// small demos; not meant for large systems.
inline LinearOperator make_dense_operator(std::size_t rows, std::size_t cols,
                                          std::vector<double> entries) {
  if (entries.size() != rows * cols) {
    throw std::invalid_argument("make_dense_operator: entry count mismatch");
  }
  auto m = std::make_shared<const std::vector<double>>(std::move(entries));
  auto fwd = [m, rows, cols](const SignalVector& u) {
    SignalVector out(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      double acc = 0.0;
      const double* row = m->data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) acc += row[j] * u[j];
      out[i] = acc;
    }
    return out;
  };
  auto adj = [m, rows, cols](const SignalVector& v) {
    SignalVector out(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* row = m->data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) out[j] += row[j] * v[i];
    }
    return out;
  };
  return LinearOperator(cols, rows, std::move(fwd), std::move(adj));
}

namespace detail {

// Maps a possibly out-of-range index into [0, n); -1 means the tap is dropped.
inline int map_index(int i, int n, Boundary b) {
  if (i >= 0 && i < n) return i;
  switch (b) {
    case Boundary::zero_pad: return -1;
    case Boundary::replicate: return i < 0 ? 0 : n - 1;
    case Boundary::circular: {
      int m = i % n;
      return m < 0 ? m + n : m;
    }
  }
  return -1;
}

}  // namespace detail

/// Uniform kernel_size x kernel_size moving-average blur on a height x width
/// image (row-major), every tap 1/kernel_size^2.
///
/// The forward pass gathers through the boundary rule; the adjoint scatters
/// through the same rule, which is the exact transpose for all three modes.
inline LinearOperator make_blur_operator(int height, int width, int kernel_size,
                                         Boundary boundary = Boundary::circular) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw std::invalid_argument("make_blur_operator: kernel_size must be odd and >= 1");
  }
  if (height < kernel_size || width < kernel_size) {
    throw std::invalid_argument("make_blur_operator: image smaller than kernel");
  }
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  if (n / static_cast<std::size_t>(width) != static_cast<std::size_t>(height) ||
      n > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
    throw std::invalid_argument("make_blur_operator: dimension overflow");
  }
  const int c = kernel_size / 2;
  const double tap = 1.0 / (static_cast<double>(kernel_size) * kernel_size);

  auto fwd = [height, width, c, tap, boundary](const SignalVector& x) {
    SignalVector out(x.size(), 0.0);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        double acc = 0.0;
        for (int di = -c; di <= c; ++di) {
          const int ii = detail::map_index(i + di, height, boundary);
          if (ii < 0) continue;
          const double* row = x.data() + static_cast<std::size_t>(ii) * width;
          for (int dj = -c; dj <= c; ++dj) {
            const int jj = detail::map_index(j + dj, width, boundary);
            if (jj < 0) continue;
            acc += row[jj];
          }
        }
        out[static_cast<std::size_t>(i) * width + j] = acc * tap;
      }
    }
    return out;
  };
  auto adj = [height, width, c, tap, boundary](const SignalVector& y) {
    SignalVector out(y.size(), 0.0);
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const double s = y[static_cast<std::size_t>(i) * width + j] * tap;
        for (int di = -c; di <= c; ++di) {
          const int ii = detail::map_index(i + di, height, boundary);
          if (ii < 0) continue;
          double* row = out.data() + static_cast<std::size_t>(ii) * width;
          for (int dj = -c; dj <= c; ++dj) {
            const int jj = detail::map_index(j + dj, width, boundary);
            if (jj < 0) continue;
            row[jj] += s;
          }
        }
      }
    }
    return out;
  };
  return LinearOperator(n, n, std::move(fwd), std::move(adj));
}

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// One orthonormal Haar analysis step over a strided length-m segment.
inline void haar_analyze_1d(double* v, int m, int stride, std::vector<double>& tmp) {
  const int half = m / 2;
  for (int t = 0; t < half; ++t) {
    const double a = v[2 * t * stride];
    const double b = v[(2 * t + 1) * stride];
    tmp[t] = (a + b) * kInvSqrt2;
    tmp[half + t] = (a - b) * kInvSqrt2;
  }
  for (int t = 0; t < m; ++t) v[t * stride] = tmp[t];
}

inline void haar_synthesize_1d(double* v, int m, int stride, std::vector<double>& tmp) {
  const int half = m / 2;
  for (int t = 0; t < half; ++t) {
    const double a = v[t * stride];
    const double d = v[(half + t) * stride];
    tmp[2 * t] = (a + d) * kInvSqrt2;
    tmp[2 * t + 1] = (a - d) * kInvSqrt2;
  }
  for (int t = 0; t < m; ++t) v[t * stride] = tmp[t];
}

// Analysis runs rows then columns per level on the shrinking low-pass block;
// synthesis inverts level by level, columns then rows.
inline SignalVector haar_analysis(const SignalVector& img, int height, int width, int levels) {
  SignalVector a = img;
  std::vector<double> tmp(static_cast<std::size_t>(std::max(height, width)));
  for (int level = 0; level < levels; ++level) {
    const int hl = height >> level;
    const int wl = width >> level;
    for (int i = 0; i < hl; ++i) {
      haar_analyze_1d(a.data() + static_cast<std::size_t>(i) * width, wl, 1, tmp);
    }
    for (int j = 0; j < wl; ++j) {
      haar_analyze_1d(a.data() + j, hl, width, tmp);
    }
  }
  return a;
}

inline SignalVector haar_synthesis(const SignalVector& coeffs, int height, int width, int levels) {
  SignalVector x = coeffs;
  std::vector<double> tmp(static_cast<std::size_t>(std::max(height, width)));
  for (int level = levels - 1; level >= 0; --level) {
    const int hl = height >> level;
    const int wl = width >> level;
    for (int j = 0; j < wl; ++j) {
      haar_synthesize_1d(x.data() + j, hl, width, tmp);
    }
    for (int i = 0; i < hl; ++i) {
      haar_synthesize_1d(x.data() + static_cast<std::size_t>(i) * width, wl, 1, tmp);
    }
  }
  return x;
}

}  // namespace detail

/// Orthonormal 2D Haar synthesis: wavelet coefficients -> image. The adjoint
/// is the analysis transform and is the exact inverse (W^T W = I).
///
/// Coefficients use the standard nested-quadrant layout: each level stores
/// its low-pass block in the top-left quadrant of the previous one.
inline LinearOperator make_haar_operator(int height, int width, int levels = 2) {
  if (levels < 1) throw std::invalid_argument("make_haar_operator: levels must be >= 1");
  if (height < 1 || width < 1) throw std::invalid_argument("make_haar_operator: bad dimensions");
  const int div = 1 << levels;
  if (height % div != 0 || width % div != 0) {
    throw std::invalid_argument("make_haar_operator: dimensions must be divisible by 2^levels");
  }
  const std::size_t n = static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  auto fwd = [height, width, levels](const SignalVector& coeffs) {
    return detail::haar_synthesis(coeffs, height, width, levels);
  };
  auto adj = [height, width, levels](const SignalVector& img) {
    return detail::haar_analysis(img, height, width, levels);
  };
  return LinearOperator(n, n, std::move(fwd), std::move(adj));
}

/// outer o inner. Adjoint composes in reverse.
inline LinearOperator compose(const LinearOperator& outer, const LinearOperator& inner) {
  if (outer.in_dim() != inner.out_dim()) {
    throw std::invalid_argument("compose: dimension mismatch");
  }
  auto fwd = [outer, inner](const SignalVector& u) { return outer.forward(inner.forward(u)); };
  auto adj = [outer, inner](const SignalVector& v) { return inner.adjoint(outer.adjoint(v)); };
  return LinearOperator(inner.in_dim(), outer.out_dim(), std::move(fwd), std::move(adj));
}

struct SpectralBound {
  double value = 0.0;  // estimate of lambda_max(A^T A)
  int iterations_used = 0;
  bool converged = false;
};

/// Power iteration on x -> A^T(Ax) from a seeded random start. Returns the
/// Rayleigh-quotient estimate; callers must still apply a safety margin
/// before using it as a Lipschitz constant.
inline SpectralBound estimate_spectral_bound(const LinearOperator& op, double rel_tol = 1e-9,
                                             int max_iters = 1000, std::uint64_t seed = 0) {
  if (rel_tol <= 0.0) throw std::invalid_argument("estimate_spectral_bound: rel_tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("estimate_spectral_bound: max_iters must be >= 1");

  Rng rng(seed);
  SignalVector x(op.in_dim());
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  double nx = norm2(x);
  if (nx == 0.0) x[0] = nx = 1.0;
  for (double& v : x) v /= nx;

  double prev = -1.0;
  for (int k = 1; k <= max_iters; ++k) {
    SignalVector y = op.adjoint(op.forward(x));
    double est = dot(x, y);  // Rayleigh quotient; x is unit
    if (est < 0.0) est = 0.0;
    const double ny = norm2(y);
    if (ny == 0.0) return {0.0, k, true};
    if (k > 1 && std::abs(est - prev) <= rel_tol * std::max(est, 1e-300)) {
      return {est, k, true};
    }
    prev = est;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = y[i] / ny;
  }
  return {prev, max_iters, false};
}

inline constexpr std::size_t kDefaultMaterializeCap = std::size_t{1} << 24;

/// Builds the dense row-major matrix of an operator, column by column.
/// Debug/oracle facility only; refuses anything past the entry cap.
inline std::vector<double> materialize(const LinearOperator& op,
                                       std::size_t max_entries = kDefaultMaterializeCap) {
  const std::size_t rows = op.out_dim(), cols = op.in_dim();
  if (cols != 0 && rows > max_entries / cols) {
    throw resource_limit_error("materialize: operator exceeds entry cap");
  }
  std::vector<double> m(rows * cols, 0.0);
  SignalVector e(cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    e[j] = 1.0;
    SignalVector col = op.forward(e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < rows; ++i) m[i * cols + j] = col[i];
  }
  return m;
}

}  // namespace sik
