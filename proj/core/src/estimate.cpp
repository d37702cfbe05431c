#include "infervar/estimate.hpp"

#include <cmath>

#include "infervar/error.hpp"
#include "infervar/parallel.hpp"

namespace infervar {

SampleSet sample_blackbox(const BlackBoxModel& model, const ImageTensor& x,
                          const PerturbationSpec& spec, std::size_t threads) {
  if (spec.method != PerturbationMethod::transform_set) {
    throw ValidationError("black-box sampling needs a transform_set spec, got " +
                          std::string(method_name(spec.method)));
  }
  spec.validate();
  SampleSet set{std::vector<ImageTensor>(spec.transforms.size()), spec};
  parallel_for(spec.transforms.size(), threads, [&](std::size_t i) {
    set.samples[i] = perturb_input(x, spec.transforms[i], model);
  });
  return set;
}

SampleSet sample_graybox(const GrayBoxModel& model, const ImageTensor& x,
                         const PerturbationSpec& spec, std::size_t threads) {
  if (spec.method == PerturbationMethod::transform_set) {
    throw ValidationError("gray-box sampling needs a gaussian_noise or dropout spec");
  }
  spec.validate();
  const TapPoint& tap = model.tap(spec.tap);
  const ImageTensor activation = model.run_prefix(x, tap);

  SampleSet set{std::vector<ImageTensor>(spec.sample_count), spec};
  parallel_for(spec.sample_count, threads, [&](std::size_t i) {
    const RandomStream stream{spec.master_seed, i};
    const Hook hook = spec.method == PerturbationMethod::gaussian_noise
                          ? Hook([&](const ImageTensor& a) { return inject_noise(a, *spec.sigma, stream); })
                          : Hook([&](const ImageTensor& a) {
                              return inject_dropout(a, *spec.rate, stream, spec.rescale);
                            });
    set.samples[i] = model.run_suffix(activation, tap, hook);
  });
  return set;
}

SampleSet sample(const BlackBoxModel& model, const ImageTensor& x, const PerturbationSpec& spec,
                 std::size_t threads) {
  if (spec.method == PerturbationMethod::transform_set) return sample_blackbox(model, x, spec, threads);
  const auto* gray = dynamic_cast<const GrayBoxModel*>(&model);
  if (gray == nullptr) {
    throw ValidationError("model " + model.name() + " is black-box; " +
                          std::string(method_name(spec.method)) + " needs tap access");
  }
  return sample_graybox(*gray, x, spec, threads);
}

UncertaintyMap variance_map(const SampleSet& set) {
  if (set.samples.size() < 2) {
    throw ValidationError("variance_map needs >= 2 samples, got " + std::to_string(set.samples.size()));
  }
  const ImageTensor& first = set.samples.front();
  for (const ImageTensor& s : set.samples) require_same_shape(first, s, "variance_map");

  ImageTensor mean(first.shape());
  ImageTensor m2(first.shape());
  auto mu = mean.values();
  auto acc = m2.values();
  double count = 0.0;
  for (const ImageTensor& s : set.samples) {
    count += 1.0;
    const auto v = s.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double delta = v[i] - mu[i];
      mu[i] += delta / count;
      acc[i] += delta * (v[i] - mu[i]);
    }
  }
  for (double& a : acc) a = std::max(a / count, 0.0);
  return UncertaintyMap{std::move(m2), std::move(mean), set.samples.size()};
}

ImageTensor log_variance(const ImageTensor& variance) {
  ImageTensor out = variance;
  for (double& v : out.values()) v = std::log(v + 1e-12);
  return out;
}

}  // namespace infervar
