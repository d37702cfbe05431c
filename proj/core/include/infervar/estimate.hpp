#pragma once

#include <cstddef>
#include <vector>

#include "infervar/models.hpp"
#include "infervar/perturb.hpp"
#include "infervar/tensor.hpp"

namespace infervar {

inline constexpr std::size_t kDefaultTransformSamples = 8;
inline constexpr std::size_t kNoiseSamplePresets[] = {8, 32};

struct SampleSet {
  std::vector<ImageTensor> samples;
  PerturbationSpec spec;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
};

/// Per-pixel population variance (denominator N) and mean of a SampleSet.
struct UncertaintyMap {
  ImageTensor variance;
  ImageTensor mean;
  std::size_t sample_count = 0;
};

/// One perturb_input sample per transform, in subset order.
SampleSet sample_blackbox(const BlackBoxModel& model, const ImageTensor& x,
                          const PerturbationSpec& spec, std::size_t threads = 1);

/// N forwards through `spec.tap`; sample i uses RandomStream{seed, i}, so the
/// set is identical for any thread count.
SampleSet sample_graybox(const GrayBoxModel& model, const ImageTensor& x,
                         const PerturbationSpec& spec, std::size_t threads = 1);

/// Dispatches on spec.method. Gray-box methods require a GrayBoxModel.
SampleSet sample(const BlackBoxModel& model, const ImageTensor& x,
                 const PerturbationSpec& spec, std::size_t threads = 1);

/// Welford accumulation in double precision.
UncertaintyMap variance_map(const SampleSet& set);

/// log(V + 1e-12), for visual inspection only.
ImageTensor log_variance(const ImageTensor& variance);

}  // namespace infervar
