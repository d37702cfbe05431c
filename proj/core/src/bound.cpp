#include "infervar/bound.hpp"

#include <algorithm>
#include <cmath>

#include "infervar/error.hpp"

namespace infervar {

std::optional<double> raw_bound(double variance, double c, double t) {
  if (variance < 0.0 || c < 0.0) throw ValidationError("bound needs variance >= 0 and C >= 0");
  if (!(t > c)) return std::nullopt;
  const double gap = t - c;
  return variance / (gap * gap);
}

std::optional<double> performance_bound(double variance, double c, double t) {
  const auto raw = raw_bound(variance, c, t);
  if (!raw) return std::nullopt;
  return std::clamp(*raw, 0.0, 1.0);
}

BoundCurve bound_curve(std::span<const double> samples, double y, std::span<const double> t_grid) {
  if (samples.size() < 2) throw ValidationError("bound_curve needs >= 2 samples");
  BoundCurve curve;
  curve.sample_count = samples.size();
  curve.low_sample_count = samples.size() < kMinTailSamples;

  const double n = static_cast<double>(samples.size());
  double mu = 0.0, m2 = 0.0, count = 0.0;
  for (double z : samples) {
    count += 1.0;
    const double delta = z - mu;
    mu += delta / count;
    m2 += delta * (z - mu);
  }
  curve.variance = std::max(m2 / n, 0.0);
  curve.c = std::abs(mu - y);

  for (double t : t_grid) {
    const auto exceed = std::count_if(samples.begin(), samples.end(),
                                      [&](double z) { return std::abs(z - y) >= t; });
    curve.t.push_back(t);
    curve.empirical.push_back(static_cast<double>(exceed) / n);
    curve.bound.push_back(raw_bound(curve.variance, curve.c, t));
  }
  return curve;
}

BoundCurve bound_curve(const SampleSet& samples, double y, const PixelCoord& pixel,
                       std::span<const double> t_grid) {
  if (samples.samples.empty()) throw ValidationError("bound_curve on empty sample set");
  const Shape& shape = samples.samples.front().shape();
  if (pixel.row >= shape.height || pixel.col >= shape.width || pixel.channel >= shape.channels) {
    throw ValidationError("pixel (" + std::to_string(pixel.row) + ", " + std::to_string(pixel.col) +
                          ", " + std::to_string(pixel.channel) + ") out of range for " + to_string(shape));
  }
  std::vector<double> values;
  values.reserve(samples.size());
  for (const ImageTensor& s : samples.samples) {
    if (s.shape() != shape) throw ValidationError("bound_curve: sample dims differ");
    values.push_back(s.at(pixel.row, pixel.col, pixel.channel));
  }
  return bound_curve(values, y, t_grid);
}

double bound_gap_area(const BoundCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.t.size(); ++i) {
    const auto gap = [&](std::size_t k) {
      const double b = curve.bound[k] ? std::min(*curve.bound[k], 1.0) : 1.0;
      return b - curve.empirical[k];
    };
    area += 0.5 * (curve.t[i + 1] - curve.t[i]) * (gap(i) + gap(i + 1));
  }
  return area;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
  if (count == 0) return {};
  if (count == 1) return {lo};
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return grid;
}

ImageTensor oracle_uncertainty(const UncertaintyMap& u, const ImageTensor& c_map, double margin) {
  require_same_shape(u.variance, c_map, "oracle_uncertainty");
  const double sigma = std::sqrt(mean(u.variance.values()));
  const double t = margin * sigma;
  ImageTensor out(c_map.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto b = performance_bound(u.variance.values()[i], c_map.values()[i], t);
    out.values()[i] = b.value_or(1.0);
  }
  return out;
}

}  // namespace infervar
