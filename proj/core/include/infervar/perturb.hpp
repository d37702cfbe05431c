#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infervar/models.hpp"
#include "infervar/random.hpp"
#include "infervar/tensor.hpp"
#include "infervar/transform.hpp"

namespace infervar {

enum class PerturbationMethod { transform_set, gaussian_noise, dropout };

std::string_view method_name(PerturbationMethod method);
PerturbationMethod parse_method(std::string_view name);

/// One perturbation recipe. Only the fields of `method` are meaningful;
/// validate() rejects a spec that sets fields of another method.
struct PerturbationSpec {
  PerturbationMethod method = PerturbationMethod::transform_set;
  std::vector<Transform> transforms;  // transform_set only
  std::optional<double> sigma;        // gaussian_noise only
  std::optional<double> rate;         // dropout only
  bool rescale = true;                // dropout only: inverted dropout
  std::string tap;                    // gray-box methods only
  std::size_t sample_count = 0;
  std::uint64_t master_seed = 0;

  /// Throws ValidationError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
};

/// Full dihedral set (N = 8).
PerturbationSpec transform_spec(std::vector<Transform> transforms = {});
PerturbationSpec noise_spec(std::string tap, double sigma, std::size_t samples,
                            std::uint64_t seed);
PerturbationSpec dropout_spec(std::string tap, double rate, std::size_t samples,
                              std::uint64_t seed, bool rescale = true);

/// Strength of a gray-box spec (sigma or rate); 0 for transform sets.
double strength(const PerturbationSpec& spec);

/// T' o F o T (x). Index permutations commute with uniform output scaling, so
/// the inverse acts directly on the model's output grid.
ImageTensor perturb_input(const ImageTensor& x, const Transform& t,
                          const BlackBoxModel& model);

/// activations + N(0, sigma^2) noise, element-wise.
ImageTensor inject_noise(const ImageTensor& activations, double sigma,
                         const RandomStream& stream);

/// Element-wise multiply by a keep mask with keep_prob = 1 - rate; when
/// `rescale` is set, kept values are divided by (1 - rate).
ImageTensor inject_dropout(const ImageTensor& activations, double rate,
                           const RandomStream& stream, bool rescale = true);

/// Per-pixel C = |E[Z] - Y| and its mean against threshold epsilon.
struct TolerabilityRecord {
  ImageTensor pixel_c;
  double mean_c = 0.0;
  double epsilon = 0.0;
  bool tolerable = false;
};

TolerabilityRecord tolerability(const ImageTensor& mean_map,
                                const ImageTensor& ground_truth, double epsilon);

/// Default threshold: 1.5 x the unperturbed prediction's mean L1 error.
double default_epsilon(const ImageTensor& prediction,
                       const ImageTensor& ground_truth);

}  // namespace infervar
