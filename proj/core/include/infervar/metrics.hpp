#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "infervar/estimate.hpp"
#include "infervar/segment.hpp"
#include "infervar/tensor.hpp"

namespace infervar {

enum class LossKind { l1, l2 };

std::string_view loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);

/// Single-channel per-pixel loss, averaged over channels.
struct ErrorMap {
  ImageTensor values;
  LossKind kind = LossKind::l1;
};

ErrorMap error_map(const ImageTensor& prediction, const ImageTensor& y,
                   LossKind kind);

/// Pearson product-moment correlation. Returns nullopt when either sequence
/// is constant (undefined, not zero). Throws ValidationError on length
/// mismatch or fewer than two elements.
std::optional<double> pearson(std::span<const double> xs,
                              std::span<const double> ys);

/// Per-pixel uncertainty: the variance averaged over channels.
ImageTensor pixel_uncertainty(const UncertaintyMap& u);

std::optional<double> pixel_correlation(const UncertaintyMap& u, const ErrorMap& e);

struct ImageMeans {
  double mean_variance = 0.0;
  double mean_error = 0.0;
};
ImageMeans image_means(const UncertaintyMap& u, const ErrorMap& e);

/// Throws ValidationError for fewer than two images.
std::optional<double> mean_correlation(std::span<const ImageMeans> images);

std::optional<double> block_correlation(const UncertaintyMap& u, const ErrorMap& e,
                                        const SegmentationLabels& labels);

std::optional<double> patch_correlation(const UncertaintyMap& u, const ErrorMap& e,
                                        std::size_t grid_rows = 10,
                                        std::size_t grid_cols = 10);

inline constexpr std::size_t kDefaultSparsificationSteps = 50;
inline constexpr double kMaxRemovedFraction = 0.99;

/// Normalized mean remaining error as the most uncertain (method) or most
/// erroneous (oracle) elements are removed.
struct SparsificationCurve {
  std::vector<double> fractions;
  std::vector<double> method;
  std::vector<double> oracle;
};

/// Removal fractions are uniform in [0, 0.99]. At fraction f the
/// ceil(f * n) highest-ranked elements are removed (capped at n - 1 so a
/// non-empty remainder always exists); ties go to the lower index first.
/// Returns nullopt when the total error is zero.
std::optional<SparsificationCurve> sparsification(std::span<const double> uncertainty,
                                                  std::span<const double> error,
                                                  std::size_t steps = kDefaultSparsificationSteps);
/// Same, on an explicit grid of fractions in [0, 1).
std::optional<SparsificationCurve> sparsification(std::span<const double> uncertainty,
                                                  std::span<const double> error,
                                                  std::span<const double> fractions);
std::optional<SparsificationCurve> sparsification(const UncertaintyMap& u,
                                                  const ErrorMap& e,
                                                  std::size_t steps = kDefaultSparsificationSteps);

/// Number of elements removed at fraction f out of n.
std::size_t removal_count(double fraction, std::size_t n);

/// Trapezoidal area of (method - oracle) over the fractions.
double ause(const SparsificationCurve& curve);

inline constexpr double kDefaultNllFloor = 1e-6;

/// Mean Gaussian NLL with mean map as mu and max(V, floor) as sigma^2.
double nll(const UncertaintyMap& u, const ImageTensor& y,
           double variance_floor = kDefaultNllFloor);

}  // namespace infervar
