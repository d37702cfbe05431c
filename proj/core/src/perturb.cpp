#include "infervar/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "infervar/error.hpp"

namespace infervar {

std::string_view method_name(PerturbationMethod method) {
  switch (method) {
    case PerturbationMethod::transform_set: return "transform_set";
    case PerturbationMethod::gaussian_noise: return "gaussian_noise";
    case PerturbationMethod::dropout: return "dropout";
  }
  return "unknown";
}

PerturbationMethod parse_method(std::string_view name) {
  if (name == "transform_set" || name == "transform") return PerturbationMethod::transform_set;
  if (name == "gaussian_noise" || name == "noise") return PerturbationMethod::gaussian_noise;
  if (name == "dropout") return PerturbationMethod::dropout;
  throw ValidationError("unknown perturbation method '" + std::string(name) + "'");
}

void PerturbationSpec::validate() const {
  if (sample_count < 2) {
    throw ValidationError("sample_count must be >= 2, got " + std::to_string(sample_count));
  }
  switch (method) {
    case PerturbationMethod::transform_set: {
      if (sigma || rate || !tap.empty())
        throw ValidationError("transform_set spec must not set sigma, rate or tap");
      if (transforms.empty()) throw ValidationError("transform subset is empty");
      for (std::size_t i = 0; i < transforms.size(); ++i) {
        (void)make_transform(transforms[i].quarter_turns, transforms[i].horizontal_flip);
        for (std::size_t j = 0; j < i; ++j)
          if (transforms[i] == transforms[j])
            throw ValidationError("duplicate transform " + transform_name(transforms[i]));
      }
      if (sample_count != transforms.size())
        throw ValidationError("transform_set needs sample_count == subset size (" +
                              std::to_string(transforms.size()) + "), got " +
                              std::to_string(sample_count));
      break;
    }
    case PerturbationMethod::gaussian_noise:
      if (!transforms.empty() || rate) throw ValidationError("noise spec must not set transforms or rate");
      if (!sigma) throw ValidationError("noise spec requires sigma");
      if (!(*sigma >= 0.0) || !std::isfinite(*sigma))
        throw ValidationError("sigma must be finite and >= 0, got " + std::to_string(*sigma));
      if (tap.empty()) throw ValidationError("noise spec requires a tap");
      break;
    case PerturbationMethod::dropout:
      if (!transforms.empty() || sigma) throw ValidationError("dropout spec must not set transforms or sigma");
      if (!rate) throw ValidationError("dropout spec requires rate");
      if (!(*rate >= 0.0 && *rate < 1.0))
        throw ValidationError("dropout rate must be in [0, 1), got " + std::to_string(*rate));
      if (tap.empty()) throw ValidationError("dropout spec requires a tap");
      break;
  }
}

PerturbationSpec transform_spec(std::vector<Transform> transforms) {
  if (transforms.empty()) transforms.assign(all_transforms().begin(), all_transforms().end());
  PerturbationSpec spec;
  spec.method = PerturbationMethod::transform_set;
  spec.sample_count = transforms.size();
  spec.transforms = std::move(transforms);
  return spec;
}

PerturbationSpec noise_spec(std::string tap, double sigma, std::size_t samples, std::uint64_t seed) {
  PerturbationSpec spec;
  spec.method = PerturbationMethod::gaussian_noise;
  spec.sigma = sigma;
  spec.tap = std::move(tap);
  spec.sample_count = samples;
  spec.master_seed = seed;
  return spec;
}

PerturbationSpec dropout_spec(std::string tap, double rate, std::size_t samples, std::uint64_t seed,
                              bool rescale) {
  PerturbationSpec spec;
  spec.method = PerturbationMethod::dropout;
  spec.rate = rate;
  spec.rescale = rescale;
  spec.tap = std::move(tap);
  spec.sample_count = samples;
  spec.master_seed = seed;
  return spec;
}

double strength(const PerturbationSpec& spec) {
  switch (spec.method) {
    case PerturbationMethod::gaussian_noise: return spec.sigma.value_or(0.0);
    case PerturbationMethod::dropout: return spec.rate.value_or(0.0);
    case PerturbationMethod::transform_set: return 0.0;
  }
  return 0.0;
}

ImageTensor perturb_input(const ImageTensor& x, const Transform& t, const BlackBoxModel& model) {
  return invert_transform(model.forward(apply_transform(x, t)), t);
}

ImageTensor inject_noise(const ImageTensor& activations, double sigma, const RandomStream& stream) {
  const std::vector<double> noise = gaussian_sample(stream, activations.size(), sigma);
  if (sigma == 0.0) return activations;
  ImageTensor out = activations;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += noise[i];
  return out;
}

ImageTensor inject_dropout(const ImageTensor& activations, double rate, const RandomStream& stream,
                           bool rescale) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ValidationError("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (rate == 0.0) return activations;
  const double keep = 1.0 - rate;
  const std::vector<std::uint8_t> mask = bernoulli_mask(stream, activations.size(), keep);
  ImageTensor out = activations;
  const double scale = rescale ? 1.0 / keep : 1.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double& v = out.values()[i];
    v = mask[i] ? (rescale ? v * scale : v) : 0.0;
  }
  return out;
}

TolerabilityRecord tolerability(const ImageTensor& mean_map, const ImageTensor& ground_truth,
                                double epsilon) {
  require_same_shape(mean_map, ground_truth, "tolerability");
  TolerabilityRecord record;
  record.pixel_c = ImageTensor(mean_map.shape());
  for (std::size_t i = 0; i < mean_map.size(); ++i)
    record.pixel_c.values()[i] = std::abs(mean_map.values()[i] - ground_truth.values()[i]);
  record.mean_c = mean(record.pixel_c.values());
  record.epsilon = epsilon;
  record.tolerable = record.mean_c <= epsilon;
  return record;
}

double default_epsilon(const ImageTensor& prediction, const ImageTensor& ground_truth) {
  return 1.5 * tolerability(prediction, ground_truth, 0.0).mean_c;
}

}  // namespace infervar
