#include "infervar/models.hpp"

#include <algorithm>
#include <cmath>

#include "infervar/error.hpp"
#include "infervar/random.hpp"

namespace infervar {

// ---------------------------------------------------------------------------
// GrayBoxModel

void GrayBoxModel::check_input(const ImageTensor& x) const { (void)output_shape(x.shape()); }

ImageTensor GrayBoxModel::forward(const ImageTensor& x) const {
  check_input(x);
  ImageTensor state = x;
  for (const Stage& stage : stages_) state = stage(state);
  return state;
}

const TapPoint& GrayBoxModel::tap(std::string_view name) const {
  for (const TapPoint& t : taps_)
    if (t.name == name) return t;
  std::string known;
  for (const TapPoint& t : taps_) known += (known.empty() ? "" : ", ") + t.name;
  throw ValidationError("unknown tap '" + std::string(name) + "' for model " + this->name() +
                        " (taps: " + known + ")");
}

ImageTensor GrayBoxModel::run_prefix(const ImageTensor& x, const TapPoint& tap) const {
  check_input(x);
  ImageTensor state = x;
  for (std::size_t s = 0; s < tap.boundary; ++s) state = stages_[s](state);
  return state;
}

ImageTensor GrayBoxModel::run_suffix(ImageTensor activation, const TapPoint& tap,
                                     const Hook& hook) const {
  if (tap.channel_begin == tap.channel_end) {
    ImageTensor hooked = hook(activation);
    require_same_shape(activation, hooked, "tap hook at " + tap.name);
    activation = std::move(hooked);
  } else {
    const ImageTensor window = activation.channel_slice(tap.channel_begin, tap.channel_end);
    const ImageTensor hooked = hook(window);
    require_same_shape(window, hooked, "tap hook at " + tap.name);
    activation.set_channel_slice(tap.channel_begin, hooked);
  }
  for (std::size_t s = tap.boundary; s < stages_.size(); ++s) activation = stages_[s](activation);
  return activation;
}

ImageTensor GrayBoxModel::forward_with_tap(const ImageTensor& x, std::string_view tap_name,
                                           const Hook& hook) const {
  const TapPoint& t = tap(tap_name);
  return run_suffix(run_prefix(x, t), t, hook);
}

// ---------------------------------------------------------------------------
// AnalyticLinearModel

namespace {

Stage affine_stage(double a, double b) {
  return [a, b](const ImageTensor& x) {
    ImageTensor out = x;
    for (double& v : out.values()) v = a * v + b;
    return out;
  };
}

}  // namespace

AnalyticLinearModel::AnalyticLinearModel(double a1, double b1, double a2, double b2)
    : a1_(a1), b1_(b1), a2_(a2), b2_(b2) {
  for (double v : {a1, b1, a2, b2})
    if (!std::isfinite(v)) throw ValidationError("analytic model coefficients must be finite");
  add_stage(affine_stage(a1_, b1_));
  add_stage(affine_stage(a2_, b2_));
  add_tap(TapPoint{"hidden", 1, 0, 0});
}

AnalyticLinearModel AnalyticLinearModel::from_affine(double a, double b) {
  return AnalyticLinearModel(1.0, 0.0, a, b);
}

Shape AnalyticLinearModel::output_shape(const Shape& input) const { return input; }

// ---------------------------------------------------------------------------
// Building blocks

ImageTensor conv3x3(const ImageTensor& x, const ToyUpsamplerModel::Conv& conv) {
  if (x.channels() != conv.in) {
    throw ValidationError("conv3x3 expects " + std::to_string(conv.in) + " channels, got " +
                          std::to_string(x.channels()));
  }
  const std::size_t h = x.height(), w = x.width();
  ImageTensor out(Shape{h, w, conv.out});
  const auto clampi = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      for (std::size_t o = 0; o < conv.out; ++o) {
        double acc = conv.bias[o];
        for (int di = -1; di <= 1; ++di) {
          const std::size_t r = clampi(static_cast<std::ptrdiff_t>(i) + di, h);
          for (int dj = -1; dj <= 1; ++dj) {
            const std::size_t c = clampi(static_cast<std::ptrdiff_t>(j) + dj, w);
            const double* wk = &conv.weights[(o * conv.in) * 9 + static_cast<std::size_t>((di + 1) * 3 + (dj + 1))];
            for (std::size_t ci = 0; ci < conv.in; ++ci) acc += wk[ci * 9] * x.at(r, c, ci);
          }
        }
        out.at(i, j, o) = acc;
      }
    }
  }
  return out;
}

ImageTensor relu(ImageTensor x) {
  for (double& v : x.values()) v = std::max(v, 0.0);
  return x;
}

ImageTensor upsample_nearest(const ImageTensor& x, std::size_t factor) {
  ImageTensor out(Shape{x.height() * factor, x.width() * factor, x.channels()});
  for (std::size_t i = 0; i < out.height(); ++i)
    for (std::size_t j = 0; j < out.width(); ++j)
      for (std::size_t c = 0; c < x.channels(); ++c) out.at(i, j, c) = x.at(i / factor, j / factor, c);
  return out;
}

ImageTensor upsample_bilinear2(const ImageTensor& x) {
  const std::size_t h = x.height(), w = x.width();
  ImageTensor out(Shape{2 * h, 2 * w, x.channels()});
  // Output pixel i maps to source coordinate (i + 0.5) / 2 - 0.5.
  const auto taps = [](std::size_t i, std::size_t n, std::size_t& lo, std::size_t& hi, double& frac) {
    const double src = (static_cast<double>(i) + 0.5) / 2.0 - 0.5;
    const double clamped = std::clamp(src, 0.0, static_cast<double>(n - 1));
    lo = static_cast<std::size_t>(std::floor(clamped));
    hi = std::min(lo + 1, n - 1);
    frac = clamped - static_cast<double>(lo);
  };
  for (std::size_t i = 0; i < 2 * h; ++i) {
    std::size_t r0, r1;
    double fr;
    taps(i, h, r0, r1, fr);
    for (std::size_t j = 0; j < 2 * w; ++j) {
      std::size_t c0, c1;
      double fc;
      taps(j, w, c0, c1, fc);
      for (std::size_t c = 0; c < x.channels(); ++c) {
        const double top = (1 - fc) * x.at(r0, c0, c) + fc * x.at(r0, c1, c);
        const double bottom = (1 - fc) * x.at(r1, c0, c) + fc * x.at(r1, c1, c);
        out.at(i, j, c) = (1 - fr) * top + fr * bottom;
      }
    }
  }
  return out;
}

ImageTensor box_downsample(const ImageTensor& x, std::size_t factor) {
  if (factor == 0 || x.height() % factor != 0 || x.width() % factor != 0) {
    throw ValidationError("box_downsample: dims " + to_string(x.shape()) +
                          " not divisible by " + std::to_string(factor));
  }
  ImageTensor out(Shape{x.height() / factor, x.width() / factor, x.channels()});
  const double inv = 1.0 / static_cast<double>(factor * factor);
  for (std::size_t i = 0; i < x.height(); ++i)
    for (std::size_t j = 0; j < x.width(); ++j)
      for (std::size_t c = 0; c < x.channels(); ++c) out.at(i / factor, j / factor, c) += x.at(i, j, c) * inv;
  return out;
}

// ---------------------------------------------------------------------------
// NearestUpsamplerModel

Shape NearestUpsamplerModel::output_shape(const Shape& input) const {
  return Shape{2 * input.height, 2 * input.width, input.channels};
}

ImageTensor NearestUpsamplerModel::forward(const ImageTensor& x) const {
  return upsample_nearest(x, 2);
}

// ---------------------------------------------------------------------------
// ToyUpsamplerModel

namespace {

constexpr double kHeadBias = 0.1;
constexpr double kHeadEdgeScale = 0.15;
constexpr double kBranchGateBias = -0.02;
constexpr double kResidualScale = 0.1;
constexpr double kBlur[9] = {1 / 16.0, 2 / 16.0, 1 / 16.0, 2 / 16.0, 4 / 16.0,
                             2 / 16.0, 1 / 16.0, 2 / 16.0, 1 / 16.0};

// Random 3x3 kernel with zero sum.
void zero_sum_kernel(PhiloxEngine& rng, double* k, double scale) {
  double sum = 0.0;
  for (int t = 0; t < 9; ++t) sum += (k[t] = rng.next_gaussian());
  for (int t = 0; t < 9; ++t) k[t] = scale * (k[t] - sum / 9.0);
}

// Zero-sum kernels for every (out, in) pair, each output row scaled to unit norm.
ToyUpsamplerModel::Conv zero_sum_conv(PhiloxEngine& rng, std::size_t in, std::size_t out,
                                      double bias) {
  ToyUpsamplerModel::Conv conv{in, out, std::vector<double>(out * in * 9), std::vector<double>(out, bias)};
  for (std::size_t o = 0; o < out; ++o) {
    double norm = 0.0;
    for (std::size_t i = 0; i < in; ++i) {
      double* k = &conv.weights[(o * in + i) * 9];
      zero_sum_kernel(rng, k, 1.0);
      for (int t = 0; t < 9; ++t) norm += k[t] * k[t];
    }
    const double inv = 1.0 / std::sqrt(norm);
    for (std::size_t t = 0; t < in * 9; ++t) conv.weights[o * in * 9 + t] *= inv;
  }
  return conv;
}

}  // namespace

ToyUpsamplerModel::ToyUpsamplerModel(std::uint64_t seed, std::size_t input_channels,
                                     std::size_t features)
    : seed_(seed), input_channels_(input_channels), features_(features) {
  if (input_channels_ == 0 || features_ < input_channels_) {
    throw ValidationError("toy upsampler needs >= 1 input channel and features >= channels");
  }
  PhiloxEngine rng(RandomStream{seed, 0x746f79ull});
  const std::size_t c_in = input_channels_, f = features_;

  // Head: feature k watches input channel k % C through a blur with a random
  // positive gain, plus a small zero-sum edge response over all channels.
  std::vector<double> gains(f);
  head_ = Conv{c_in, f, std::vector<double>(f * c_in * 9, 0.0), std::vector<double>(f, kHeadBias)};
  for (std::size_t k = 0; k < f; ++k) {
    gains[k] = 0.6 + 0.8 * rng.next_unit();
    for (std::size_t i = 0; i < c_in; ++i) {
      double* kernel = &head_.weights[(k * c_in + i) * 9];
      zero_sum_kernel(rng, kernel, kHeadEdgeScale / std::sqrt(static_cast<double>(c_in)));
      if (i == k % c_in)
        for (int t = 0; t < 9; ++t) kernel[t] += gains[k] * kBlur[t];
    }
  }
  branch_ = zero_sum_conv(rng, f, f, 0.0);
  merge_ = zero_sum_conv(rng, f, f, kBranchGateBias);

  // Decode averages the features of each channel, undoing gain and bias.
  decode_.assign(c_in * f, 0.0);
  decode_bias_.assign(c_in, 0.0);
  for (std::size_t c = 0; c < c_in; ++c) {
    std::size_t members = 0;
    for (std::size_t k = c; k < f; k += c_in) ++members;
    for (std::size_t k = c; k < f; k += c_in) {
      decode_[c * f + k] = 1.0 / (static_cast<double>(members) * gains[k]);
      decode_bias_[c] -= kHeadBias * decode_[c * f + k];
    }
  }

  // loc0 -> head -> loc1 -> branch -> loc2 -> merge -> loc3 -> tail
  add_stage([this](const ImageTensor& x) { return relu(conv3x3(x, head_)); });
  add_stage([this](const ImageTensor& h) {
    const ImageTensor t = relu(conv3x3(h, branch_));
    ImageTensor state(Shape{h.height(), h.width(), 2 * features_});
    state.set_channel_slice(0, h);
    state.set_channel_slice(features_, t);
    return state;
  });
  add_stage([this](const ImageTensor& state) {
    ImageTensor merged = state.channel_slice(0, features_);
    const ImageTensor gated = relu(conv3x3(state.channel_slice(features_, 2 * features_), merge_));
    for (std::size_t i = 0; i < merged.size(); ++i)
      merged.values()[i] += kResidualScale * gated.values()[i];
    return merged;
  });
  add_stage([this](const ImageTensor& m) {
    ImageTensor base(Shape{m.height(), m.width(), input_channels_});
    for (std::size_t p = 0; p < m.height() * m.width(); ++p) {
      for (std::size_t c = 0; c < input_channels_; ++c) {
        double acc = decode_bias_[c];
        for (std::size_t k = 0; k < features_; ++k)
          acc += decode_[c * features_ + k] * m.values()[p * features_ + k];
        base.values()[p * input_channels_ + c] = acc;
      }
    }
    return upsample_bilinear2(base);
  });

  add_tap(TapPoint{"loc0", 0, 0, 0});
  add_tap(TapPoint{"loc1", 1, 0, 0});
  add_tap(TapPoint{"loc2", 2, features_, 2 * features_});
  add_tap(TapPoint{"loc3", 3, 0, 0});
}

Shape ToyUpsamplerModel::output_shape(const Shape& input) const {
  if (input.channels != input_channels_) {
    throw ValidationError("toy_upsampler: dimension mismatch, expected " +
                          std::to_string(input_channels_) + " channels, got " +
                          to_string(input));
  }
  return Shape{2 * input.height, 2 * input.width, input.channels};
}

void ToyUpsamplerModel::check_input(const ImageTensor& x) const { (void)output_shape(x.shape()); }

// ---------------------------------------------------------------------------
// Factories and synthetic data

std::unique_ptr<BlackBoxModel> make_model(std::string_view name, const ModelOptions& options) {
  if (name == "analytic_linear")
    return std::make_unique<AnalyticLinearModel>(options.a1, options.b1, options.a2, options.b2);
  if (name == "nearest_upsampler") return std::make_unique<NearestUpsamplerModel>();
  if (name == "toy_upsampler")
    return std::make_unique<ToyUpsamplerModel>(options.seed, options.channels);
  throw ConfigError("unknown model '" + std::string(name) +
                    "' (expected analytic_linear, nearest_upsampler or toy_upsampler)");
}

std::size_t model_scale(const BlackBoxModel& model) {
  const Shape probe{8, 8, 1};
  Shape out;
  try {
    out = model.output_shape(probe);
  } catch (const ValidationError&) {
    // Models with fixed channel counts; retry with a few common ones.
    for (std::size_t c : {3u, 2u, 4u}) {
      try {
        out = model.output_shape(Shape{8, 8, c});
        break;
      } catch (const ValidationError&) {
      }
    }
  }
  if (out.height == 0) throw ValidationError("cannot determine scale of model " + model.name());
  return out.height / probe.height;
}

ImageTensor synthetic_scene(std::size_t height, std::size_t width, std::size_t channels,
                            std::uint64_t seed) {
  PhiloxEngine rng(RandomStream{seed, 0x7363656e65ull});
  ImageTensor img(Shape{height, width, channels});
  const double h = static_cast<double>(height), w = static_cast<double>(width);

  std::vector<double> base(channels), gx(channels), gy(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    base[c] = 0.2 + 0.3 * rng.next_unit();
    gx[c] = 0.2 * (rng.next_unit() - 0.5);
    gy[c] = 0.2 * (rng.next_unit() - 0.5);
  }
  for (std::size_t i = 0; i < height; ++i)
    for (std::size_t j = 0; j < width; ++j)
      for (std::size_t c = 0; c < channels; ++c)
        img.at(i, j, c) = base[c] + gx[c] * static_cast<double>(j) / w + gy[c] * static_cast<double>(i) / h;

  const int shapes = 3 + static_cast<int>(rng.next_u32() % 4);
  for (int s = 0; s < shapes; ++s) {
    const bool disc = rng.next_unit() < 0.5;
    const double ci = rng.next_unit() * h, cj = rng.next_unit() * w;
    const double ri = (0.1 + 0.25 * rng.next_unit()) * h, rj = (0.1 + 0.25 * rng.next_unit()) * w;
    std::vector<double> value(channels);
    for (double& v : value) v = rng.next_unit();
    for (std::size_t i = 0; i < height; ++i) {
      for (std::size_t j = 0; j < width; ++j) {
        const double di = (static_cast<double>(i) + 0.5 - ci) / ri;
        const double dj = (static_cast<double>(j) + 0.5 - cj) / rj;
        const bool inside = disc ? di * di + dj * dj <= 1.0 : std::abs(di) <= 1.0 && std::abs(dj) <= 1.0;
        if (inside)
          for (std::size_t c = 0; c < channels; ++c) img.at(i, j, c) = value[c];
      }
    }
  }
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

ImagePair synthetic_pair(const BlackBoxModel& model, std::size_t height, std::size_t width,
                         std::size_t channels, std::uint64_t seed) {
  const std::size_t scale = model_scale(model);
  if (scale > 1) {
    ImageTensor hr = synthetic_scene(height * scale, width * scale, channels, seed);
    ImageTensor lr = box_downsample(hr, scale);
    return ImagePair{std::move(lr), std::move(hr)};
  }
  ImageTensor x = synthetic_scene(height, width, channels, seed);
  ImageTensor y = model.forward(x);
  const ImageTensor offset = synthetic_scene(height, width, channels, seed ^ 0x9e3779b97f4a7c15ull);
  for (std::size_t i = 0; i < y.size(); ++i) y.values()[i] += 0.05 * (offset.values()[i] - 0.5);
  return ImagePair{std::move(x), std::move(y)};
}

}  // namespace infervar
