// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "sik/common.hpp"
#include "sik/operators.hpp"

namespace sik {

/// Row-major grayscale image.
struct ImageGrid {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  std::size_t size() const { return pixels.size(); }

  std::pair<double, double> value_range() const {
    double lo = pixels.empty() ? 0.0 : pixels[0];
    double hi = lo;
    for (double v : pixels) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }
};

enum class PhantomVariant { standard, modified };

namespace detail {

struct Ellipse {
  double a, b;       // semi-axes along x and y before rotation
  double x0, y0;     // center in [-1,1]^2 coordinates
  double phi_deg;    // counterclockwise rotation
};

// Classic ten-ellipse head phantom geometry.
inline constexpr std::array<Ellipse, 10> kPhantomGeometry{{
    {0.6900, 0.9200, 0.00, 0.0000, 0.0},
    {0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {0.1100, 0.3100, 0.22, 0.0000, -18.0},
    {0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.2100, 0.2500, 0.00, 0.3500, 0.0},
    {0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.0460, 0.0460, 0.00, -0.1000, 0.0},
    {0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.0230, 0.0230, 0.00, -0.6060, 0.0},
    {0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

inline constexpr std::array<double, 10> kIntensityStandard{
    1.0, -0.98, -0.02, -0.02, 0.01, 0.01, 0.01, 0.01, 0.01, 0.01};
inline constexpr std::array<double, 10> kIntensityModified{
    1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};

}  // namespace detail

/// Renders the ten-ellipse head phantom at pixel centers, the grid spanning
/// [-1,1] on both axes with the top row at y = +1. The standard variant keeps
/// the original low-contrast intensities; modified is the high-contrast set
/// common in toolkits. Values lie in [0,1] for both.
inline ImageGrid shepp_logan(int height, int width,
                             PhantomVariant variant = PhantomVariant::standard) {
  if (height < 16 || width < 16) {
    throw std::invalid_argument("shepp_logan: dimensions must be >= 16");
  }
  const auto& intensity = variant == PhantomVariant::standard ? detail::kIntensityStandard
                                                              : detail::kIntensityModified;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  struct Prepared {
    double cs, sn, inv_a2, inv_b2, x0, y0, val;
  };
  std::array<Prepared, 10> prep;
  for (std::size_t e = 0; e < prep.size(); ++e) {
    const auto& ell = detail::kPhantomGeometry[e];
    prep[e] = {std::cos(ell.phi_deg * kDegToRad), std::sin(ell.phi_deg * kDegToRad),
               1.0 / (ell.a * ell.a), 1.0 / (ell.b * ell.b), ell.x0, ell.y0, intensity[e]};
  }

  ImageGrid img{height, width, std::vector<double>(static_cast<std::size_t>(height) * width, 0.0)};
  for (int i = 0; i < height; ++i) {
    const double y = static_cast<double>(height - 1 - 2 * i) / (height - 1);
    for (int j = 0; j < width; ++j) {
      const double x = static_cast<double>(2 * j - (width - 1)) / (width - 1);
      double v = 0.0;
      for (const auto& pe : prep) {
        const double dx = x - pe.x0;
        const double dy = y - pe.y0;
        const double xr = dx * pe.cs + dy * pe.sn;
        const double yr = -dx * pe.sn + dy * pe.cs;
        if (xr * xr * pe.inv_a2 + yr * yr * pe.inv_b2 <= 1.0) v += pe.val;
      }
      // Overlapping signed intensities cancel to analytic zeros; keep the floor exact.
      img.pixels[static_cast<std::size_t>(i) * width + j] = std::max(v, 0.0);
    }
  }
  return img;
}

/// Blur + additive Gaussian noise parameters. sigma is an absolute standard
/// deviation on the image's intensity scale.
struct DegradationSpec {
  int kernel_size = 5;
  Boundary boundary = Boundary::circular;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Applies the uniform blur, then adds i.i.d. Gaussian noise drawn in
/// row-major pixel order from the seeded generator. Identical inputs give
/// bit-identical output.
inline ImageGrid degrade(const ImageGrid& image, const DegradationSpec& spec) {
  if (spec.sigma < 0.0) throw std::invalid_argument("degrade: sigma must be >= 0");
  LinearOperator blur = make_blur_operator(image.height, image.width, spec.kernel_size,
                                           spec.boundary);
  ImageGrid out{image.height, image.width, blur.forward(image.pixels)};
  if (spec.sigma > 0.0) {
    Rng rng(spec.seed);
    for (double& v : out.pixels) v += spec.sigma * rng.gaussian();
  }
  return out;
}

}  // namespace sik
