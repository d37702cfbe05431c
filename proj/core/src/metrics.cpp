#include "infervar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "infervar/error.hpp"

namespace infervar {

std::string_view loss_name(LossKind kind) { return kind == LossKind::l1 ? "l1" : "l2"; }

LossKind parse_loss(std::string_view name) {
  if (name == "l1" || name == "L1") return LossKind::l1;
  if (name == "l2" || name == "L2") return LossKind::l2;
  throw ValidationError("unknown loss kind '" + std::string(name) + "' (expected l1 or l2)");
}

ErrorMap error_map(const ImageTensor& prediction, const ImageTensor& y, LossKind kind) {
  require_same_shape(prediction, y, "error_map");
  const std::size_t channels = prediction.channels();
  ImageTensor out(Shape{prediction.height(), prediction.width(), 1});
  for (std::size_t p = 0; p < out.size(); ++p) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const double d = prediction.values()[p * channels + c] - y.values()[p * channels + c];
      sum += kind == LossKind::l1 ? std::abs(d) : d * d;
    }
    out.values()[p] = channels == 1 ? sum : sum / static_cast<double>(channels);
  }
  return ErrorMap{std::move(out), kind};
}

std::optional<double> pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("pearson: length mismatch " + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw ValidationError("pearson needs at least 2 values");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(xs) || constant(ys)) return std::nullopt;

  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

ImageTensor pixel_uncertainty(const UncertaintyMap& u) { return u.variance.channel_mean(); }

namespace {

ImageTensor checked_uncertainty(const UncertaintyMap& u, const ErrorMap& e, const char* what) {
  ImageTensor v = pixel_uncertainty(u);
  require_same_shape(e.values, v, what);
  return v;
}

}  // namespace

std::optional<double> pixel_correlation(const UncertaintyMap& u, const ErrorMap& e) {
  const ImageTensor v = checked_uncertainty(u, e, "pixel_correlation");
  return pearson(v.values(), e.values.values());
}

ImageMeans image_means(const UncertaintyMap& u, const ErrorMap& e) {
  const ImageTensor v = checked_uncertainty(u, e, "image_means");
  return ImageMeans{mean(v.values()), mean(e.values.values())};
}

std::optional<double> mean_correlation(std::span<const ImageMeans> images) {
  if (images.size() < 2) {
    throw ValidationError("mean correlation needs >= 2 images, got " + std::to_string(images.size()));
  }
  std::vector<double> v, l;
  for (const ImageMeans& m : images) {
    v.push_back(m.mean_variance);
    l.push_back(m.mean_error);
  }
  return pearson(v, l);
}

std::optional<double> block_correlation(const UncertaintyMap& u, const ErrorMap& e,
                                        const SegmentationLabels& labels) {
  const ImageTensor v = checked_uncertainty(u, e, "block_correlation");
  return pearson(region_means(v, labels).values(), region_means(e.values, labels).values());
}

std::optional<double> patch_correlation(const UncertaintyMap& u, const ErrorMap& e,
                                        std::size_t grid_rows, std::size_t grid_cols) {
  return block_correlation(u, e, patch_labels(e.values.height(), e.values.width(), grid_rows, grid_cols));
}

std::size_t removal_count(double fraction, std::size_t n) {
  if (n == 0) return 0;
  // The small slack keeps grid values such as 0.25 * 4 from rounding up.
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  const auto k = static_cast<std::size_t>(std::max(raw, 0.0));
  return std::min(k, n - 1);
}

namespace {

// Descending by key, ties by ascending index.
std::vector<std::size_t> removal_order(std::span<const double> key) {
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return order;
}

// suffix[k] = sum of error over order[k..n).
std::vector<double> remaining_sums(const std::vector<std::size_t>& order, std::span<const double> error) {
  std::vector<double> suffix(order.size() + 1, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) suffix[k] = suffix[k + 1] + error[order[k]];
  return suffix;
}

}  // namespace

std::optional<SparsificationCurve> sparsification(std::span<const double> uncertainty,
                                                  std::span<const double> error,
                                                  std::span<const double> fractions) {
  if (uncertainty.size() != error.size()) {
    throw ValidationError("sparsification: length mismatch " + std::to_string(uncertainty.size()) +
                          " vs " + std::to_string(error.size()));
  }
  const std::size_t n = error.size();
  if (n == 0) throw ValidationError("sparsification on empty map");
  for (double e : error)
    if (!(e >= 0.0)) throw ValidationError("sparsification: error values must be >= 0");
  for (double f : fractions)
    if (!(f >= 0.0 && f < 1.0)) throw ValidationError("sparsification fractions must be in [0, 1)");

  const double total = std::accumulate(error.begin(), error.end(), 0.0);
  if (total <= 0.0) return std::nullopt;
  const double full_mean = total / static_cast<double>(n);

  const std::vector<double> method_sums = remaining_sums(removal_order(uncertainty), error);
  const std::vector<double> oracle_sums = remaining_sums(removal_order(error), error);

  SparsificationCurve curve;
  for (double f : fractions) {
    const std::size_t k = removal_count(f, n);
    const double remaining = static_cast<double>(n - k);
    curve.fractions.push_back(f);
    curve.method.push_back(method_sums[k] / remaining / full_mean);
    curve.oracle.push_back(oracle_sums[k] / remaining / full_mean);
  }
  return curve;
}

std::optional<SparsificationCurve> sparsification(std::span<const double> uncertainty,
                                                  std::span<const double> error, std::size_t steps) {
  if (steps < 2) throw ValidationError("sparsification needs steps >= 2");
  std::vector<double> fractions(steps);
  for (std::size_t i = 0; i < steps; ++i)
    fractions[i] = kMaxRemovedFraction * static_cast<double>(i) / static_cast<double>(steps - 1);
  return sparsification(uncertainty, error, fractions);
}

std::optional<SparsificationCurve> sparsification(const UncertaintyMap& u, const ErrorMap& e,
                                                  std::size_t steps) {
  const ImageTensor v = checked_uncertainty(u, e, "sparsification");
  return sparsification(v.values(), e.values.values(), steps);
}

double ause(const SparsificationCurve& curve) {
  const std::size_t n = curve.fractions.size();
  if (n < 2 || curve.method.size() != n || curve.oracle.size() != n) {
    throw ValidationError("ause: malformed sparsification curve");
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double d0 = curve.method[i] - curve.oracle[i];
    const double d1 = curve.method[i + 1] - curve.oracle[i + 1];
    area += 0.5 * (curve.fractions[i + 1] - curve.fractions[i]) * (d0 + d1);
  }
  return area;
}

double nll(const UncertaintyMap& u, const ImageTensor& y, double variance_floor) {
  if (!(variance_floor > 0.0)) throw ValidationError("nll variance floor must be > 0");
  require_same_shape(u.mean, y, "nll (mean vs ground truth)");
  require_same_shape(u.variance, y, "nll (variance vs ground truth)");
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double var = std::max(u.variance.values()[i], variance_floor);
    const double d = y.values()[i] - u.mean.values()[i];
    sum += 0.5 * (log_two_pi + std::log(var)) + d * d / (2.0 * var);
  }
  return sum / static_cast<double>(y.size());
}

}  // namespace infervar
