#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "infervar/tensor.hpp"

namespace infervar {

/// Total partition of an H x W grid into `cluster_count` non-empty clusters.
struct SegmentationLabels {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint32_t> labels;  // row-major, one per pixel
  std::size_t cluster_count = 0;

  /// Throws ValidationError if any label is out of range or unused.
  void validate() const;
  [[nodiscard]] std::uint32_t at(std::size_t row, std::size_t col) const {
    return labels[row * width + col];
  }
};

struct LcmParams {
  int window_radius = 5;
  double weight_sigma = 2.0;
  int max_iters = 100;
  double tol = 0.25;
};

/// Local-center-of-mass segmentation: each pixel climbs to the intensity-
/// weighted, Gaussian-windowed centre of mass of its neighbourhood until the
/// step is below `tol`. Pixels whose fixed points round to the same grid
/// location share a label; labels follow row-major order of fixed points.
/// Multi-channel images are reduced to their channel mean first.
SegmentationLabels lcm_segment(const ImageTensor& image,
                               const LcmParams& params = {});

SegmentationLabels singleton_labels(std::size_t height, std::size_t width);
SegmentationLabels single_cluster_labels(std::size_t height, std::size_t width);

/// Rectangular grid of grid_rows x grid_cols patches. Patch extents are
/// floor(H / grid_rows) by floor(W / grid_cols); the last row and column of
/// patches absorb the remainder. Throws ValidationError if the image is
/// smaller than the grid.
SegmentationLabels patch_labels(std::size_t height, std::size_t width,
                                std::size_t grid_rows = 10,
                                std::size_t grid_cols = 10);

/// Replaces every pixel (all channels) by the mean of its cluster.
ImageTensor region_means(const ImageTensor& map, const SegmentationLabels& labels);

/// Labels as a single-channel tensor of integer values.
ImageTensor labels_to_tensor(const SegmentationLabels& labels);
/// Hash-coloured RGB preview in [0, 1].
ImageTensor labels_preview(const SegmentationLabels& labels);

}  // namespace infervar
