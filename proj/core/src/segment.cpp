#include "infervar/segment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "infervar/error.hpp"

namespace infervar {

void SegmentationLabels::validate() const {
  if (labels.size() != height * width) {
    throw ValidationError("segmentation has " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(height) + "x" + std::to_string(width) + " pixels");
  }
  std::vector<std::size_t> counts(cluster_count, 0);
  for (std::uint32_t l : labels) {
    if (l >= cluster_count) throw ValidationError("segmentation label out of range");
    ++counts[l];
  }
  if (std::find(counts.begin(), counts.end(), 0u) != counts.end()) {
    throw ValidationError("segmentation has an empty cluster");
  }
}

SegmentationLabels lcm_segment(const ImageTensor& image, const LcmParams& params) {
  if (params.window_radius < 1) throw ValidationError("lcm window_radius must be >= 1");
  if (!(params.weight_sigma > 0.0)) throw ValidationError("lcm weight_sigma must be > 0");
  if (params.max_iters < 0 || !(params.tol >= 0.0)) throw ValidationError("lcm max_iters/tol must be >= 0");

  const ImageTensor lum = image.channel_mean();
  const auto h = static_cast<std::ptrdiff_t>(lum.height());
  const auto w = static_cast<std::ptrdiff_t>(lum.width());
  const std::ptrdiff_t r = params.window_radius;
  const double inv_two_s2 = 1.0 / (2.0 * params.weight_sigma * params.weight_sigma);

  std::vector<std::size_t> fixed_point(lum.size());
  for (std::ptrdiff_t i = 0; i < h; ++i) {
    for (std::ptrdiff_t j = 0; j < w; ++j) {
      double pr = static_cast<double>(i), pc = static_cast<double>(j);
      for (int it = 0; it < params.max_iters; ++it) {
        const auto cr = std::clamp<std::ptrdiff_t>(std::lround(pr), 0, h - 1);
        const auto cc = std::clamp<std::ptrdiff_t>(std::lround(pc), 0, w - 1);
        double sw = 0.0, sr = 0.0, sc = 0.0;
        for (std::ptrdiff_t qr = std::max<std::ptrdiff_t>(cr - r, 0); qr <= std::min(cr + r, h - 1); ++qr) {
          for (std::ptrdiff_t qc = std::max<std::ptrdiff_t>(cc - r, 0); qc <= std::min(cc + r, w - 1); ++qc) {
            const double dr = static_cast<double>(qr) - pr, dc = static_cast<double>(qc) - pc;
            const double wt = std::max(lum.at(static_cast<std::size_t>(qr), static_cast<std::size_t>(qc)), 0.0) *
                              std::exp(-(dr * dr + dc * dc) * inv_two_s2);
            sw += wt;
            sr += wt * static_cast<double>(qr);
            sc += wt * static_cast<double>(qc);
          }
        }
        if (sw <= 0.0) break;  // black window: stay put
        const double nr = sr / sw, nc = sc / sw;
        const double step = std::hypot(nr - pr, nc - pc);
        pr = nr;
        pc = nc;
        if (step < params.tol) break;
      }
      const auto fr = std::clamp<std::ptrdiff_t>(std::lround(pr), 0, h - 1);
      const auto fc = std::clamp<std::ptrdiff_t>(std::lround(pc), 0, w - 1);
      fixed_point[static_cast<std::size_t>(i * w + j)] = static_cast<std::size_t>(fr * w + fc);
    }
  }

  std::map<std::size_t, std::uint32_t> ids;
  for (std::size_t fp : fixed_point) ids.emplace(fp, 0);
  std::uint32_t next = 0;
  for (auto& [fp, id] : ids) id = next++;

  SegmentationLabels out{lum.height(), lum.width(), {}, ids.size()};
  out.labels.reserve(fixed_point.size());
  for (std::size_t fp : fixed_point) out.labels.push_back(ids[fp]);
  return out;
}

SegmentationLabels singleton_labels(std::size_t height, std::size_t width) {
  SegmentationLabels out{height, width, std::vector<std::uint32_t>(height * width), height * width};
  for (std::size_t i = 0; i < out.labels.size(); ++i) out.labels[i] = static_cast<std::uint32_t>(i);
  return out;
}

SegmentationLabels single_cluster_labels(std::size_t height, std::size_t width) {
  return SegmentationLabels{height, width, std::vector<std::uint32_t>(height * width, 0), 1};
}

SegmentationLabels patch_labels(std::size_t height, std::size_t width, std::size_t grid_rows,
                                std::size_t grid_cols) {
  if (grid_rows == 0 || grid_cols == 0 || height < grid_rows || width < grid_cols) {
    throw ValidationError("image " + std::to_string(height) + "x" + std::to_string(width) +
                          " is smaller than the " + std::to_string(grid_rows) + "x" +
                          std::to_string(grid_cols) + " patch grid");
  }
  const std::size_t ph = height / grid_rows, pw = width / grid_cols;
  SegmentationLabels out{height, width, std::vector<std::uint32_t>(height * width), grid_rows * grid_cols};
  for (std::size_t i = 0; i < height; ++i) {
    const std::size_t pr = std::min(i / ph, grid_rows - 1);
    for (std::size_t j = 0; j < width; ++j) {
      const std::size_t pc = std::min(j / pw, grid_cols - 1);
      out.labels[i * width + j] = static_cast<std::uint32_t>(pr * grid_cols + pc);
    }
  }
  return out;
}

ImageTensor region_means(const ImageTensor& map, const SegmentationLabels& labels) {
  if (map.height() != labels.height || map.width() != labels.width) {
    throw ValidationError("region_means: dimension mismatch, labels " + std::to_string(labels.height) +
                          "x" + std::to_string(labels.width) + ", map " + to_string(map.shape()));
  }
  labels.validate();
  const std::size_t channels = map.channels();
  std::vector<double> sums(labels.cluster_count * channels, 0.0);
  std::vector<double> counts(labels.cluster_count, 0.0);
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    const std::uint32_t l = labels.labels[p];
    counts[l] += 1.0;
    for (std::size_t c = 0; c < channels; ++c) sums[l * channels + c] += map.values()[p * channels + c];
  }
  ImageTensor out(map.shape());
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    const std::uint32_t l = labels.labels[p];
    for (std::size_t c = 0; c < channels; ++c) {
      // Singleton clusters copy the value so they are exactly the identity.
      out.values()[p * channels + c] =
          counts[l] == 1.0 ? map.values()[p * channels + c] : sums[l * channels + c] / counts[l];
    }
  }
  return out;
}

ImageTensor labels_to_tensor(const SegmentationLabels& labels) {
  ImageTensor out(Shape{labels.height, labels.width, 1});
  for (std::size_t p = 0; p < labels.labels.size(); ++p) out.values()[p] = labels.labels[p];
  return out;
}

ImageTensor labels_preview(const SegmentationLabels& labels) {
  ImageTensor out(Shape{labels.height, labels.width, 3});
  for (std::size_t p = 0; p < labels.labels.size(); ++p) {
    std::uint32_t x = labels.labels[p] * 0x9E3779B1u + 0x7F4A7C15u;
    x ^= x >> 15;
    x *= 0x2C1B3C6Du;
    x ^= x >> 12;
    for (std::size_t c = 0; c < 3; ++c) out.values()[p * 3 + c] = static_cast<double>((x >> (8 * c)) & 0xFFu) / 255.0;
  }
  return out;
}

}  // namespace infervar
