#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "infervar/estimate.hpp"
#include "infervar/tensor.hpp"

namespace infervar {

/// Tail bound P(|Z - Y| >= t) <= V / (t - C)^2, clamped to [0, 1].
/// Returns nullopt when t <= c (outside the region where the bound holds).
std::optional<double> performance_bound(double variance, double c, double t);

/// Unclamped V / (t - C)^2, or nullopt when t <= c.
std::optional<double> raw_bound(double variance, double c, double t);

struct PixelCoord {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t channel = 0;
};

inline constexpr std::size_t kMinTailSamples = 1000;

struct BoundCurve {
  std::vector<double> t;
  std::vector<double> empirical;           // fraction of samples with |z - y| >= t
  std::vector<std::optional<double>> bound;  // unclamped; nullopt when t <= C
  double variance = 0.0;
  double c = 0.0;
  std::size_t sample_count = 0;
  bool low_sample_count = false;
};

BoundCurve bound_curve(std::span<const double> samples, double y,
                       std::span<const double> t_grid);
BoundCurve bound_curve(const SampleSet& samples, double y, const PixelCoord& pixel,
                       std::span<const double> t_grid);

/// Area between the clamped bound and the empirical curve (trapezoid over t).
/// Rows with t <= C count the bound as the vacuous value 1.
double bound_gap_area(const BoundCurve& curve);

/// `count` evenly spaced values in [lo, hi].
std::vector<double> linear_grid(double lo, double hi, std::size_t count);

/// Oracle uncertainty V / (t - C)^2 with t = margin * sigma, sigma^2 the
/// image-average variance; pixels with t <= C (and results above 1) become 1.
ImageTensor oracle_uncertainty(const UncertaintyMap& u, const ImageTensor& c_map,
                               double margin = 5.0);

}  // namespace infervar
