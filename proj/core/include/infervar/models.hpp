#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "infervar/tensor.hpp"

namespace infervar {

/// Deterministic image-to-image mapping seen only through its forward pass.
class BlackBoxModel {
 public:
  virtual ~BlackBoxModel() = default;

  [[nodiscard]] virtual std::string name() const = 0;
  /// Output dims for an input of `input` dims; throws ValidationError if the
  /// model does not accept them.
  [[nodiscard]] virtual Shape output_shape(const Shape& input) const = 0;
  [[nodiscard]] virtual ImageTensor forward(const ImageTensor& x) const = 0;
};

using Hook = std::function<ImageTensor(const ImageTensor&)>;
using Stage = std::function<ImageTensor(const ImageTensor&)>;

/// Named boundary between stages. The hook acts on channels
/// [channel_begin, channel_end) of the activation after `boundary` stages;
/// an empty range (0, 0) addresses every channel. Channel windows let a tap
/// sit inside a residual branch while the skip path rides along untouched.
struct TapPoint {
  std::string name;
  std::size_t boundary = 0;
  std::size_t channel_begin = 0;
  std::size_t channel_end = 0;
};

/// Model whose intermediate activations may be perturbed at named taps.
/// forward() is the composition of all stages in order.
class GrayBoxModel : public BlackBoxModel {
 public:
  [[nodiscard]] ImageTensor forward(const ImageTensor& x) const override;

  /// F2(hook(F1(x))) where F1/F2 are the stages before/after `tap`.
  [[nodiscard]] ImageTensor forward_with_tap(const ImageTensor& x,
                                             std::string_view tap,
                                             const Hook& hook) const;

  /// Activation right after the tap boundary (F1(x)).
  [[nodiscard]] ImageTensor run_prefix(const ImageTensor& x,
                                       const TapPoint& tap) const;
  /// Applies `hook` to the tap's channel window of `activation`, then F2.
  [[nodiscard]] ImageTensor run_suffix(ImageTensor activation,
                                       const TapPoint& tap,
                                       const Hook& hook) const;

  [[nodiscard]] const TapPoint& tap(std::string_view name) const;
  [[nodiscard]] const std::vector<TapPoint>& taps() const { return taps_; }
  [[nodiscard]] std::size_t stage_count() const { return stages_.size(); }

 protected:
  void add_stage(Stage stage) { stages_.push_back(std::move(stage)); }
  void add_tap(TapPoint tap) { taps_.push_back(std::move(tap)); }
  /// Hook for subclasses to reject bad inputs before any stage runs.
  virtual void check_input(const ImageTensor& x) const;

 private:
  std::vector<Stage> stages_;
  std::vector<TapPoint> taps_;
};

/// Per-pixel affine model z = a2 * (a1 * x + b1) + b2 with one tap ("hidden")
/// between the two affine stages. Noise of std sigma injected at the tap
/// reaches the output with std |a2| * sigma.
class AnalyticLinearModel : public GrayBoxModel {
 public:
  AnalyticLinearModel(double a1, double b1, double a2, double b2);
  /// Convenience: z = a * x + b with the tap gain a2 = a and a1 = 1.
  static AnalyticLinearModel from_affine(double a, double b);

  [[nodiscard]] std::string name() const override { return "analytic_linear"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;

  [[nodiscard]] double gain() const { return a1_ * a2_; }
  [[nodiscard]] double offset() const { return a2_ * b1_ + b2_; }
  [[nodiscard]] double post_tap_gain() const { return a2_; }
  [[nodiscard]] double pre_tap_gain() const { return a1_; }
  [[nodiscard]] double pre_tap_offset() const { return b1_; }

 private:
  double a1_, b1_, a2_, b2_;
};

/// Pure x2 nearest-neighbour upsampler. Commutes exactly with every dihedral
/// transform, so transform sampling yields zero variance.
class NearestUpsamplerModel : public BlackBoxModel {
 public:
  [[nodiscard]] std::string name() const override { return "nearest_upsampler"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;
  [[nodiscard]] ImageTensor forward(const ImageTensor& x) const override;
};

/// Small x2 super-resolution network with seeded random weights, laid out
/// like a residual SR generator:
///
///   loc0  input (all channels)
///   head  conv3x3 + ReLU            -> loc1 (features, all channels)
///   body  conv3x3 + ReLU (branch)   -> loc2 (branch activations only)
///   merge gated conv3x3, residual   -> loc3 (merged features)
///   tail  per-channel decode, bilinear x2
///
/// Branch kernels are zero-sum, so the branch is silent on flat regions and
/// only fires around intensity edges. Stages capture `this`, hence the model
/// is neither copyable nor movable.
class ToyUpsamplerModel : public GrayBoxModel {
 public:
  explicit ToyUpsamplerModel(std::uint64_t seed, std::size_t input_channels = 1,
                             std::size_t features = 6);
  ToyUpsamplerModel(const ToyUpsamplerModel&) = delete;
  ToyUpsamplerModel& operator=(const ToyUpsamplerModel&) = delete;

  [[nodiscard]] std::string name() const override { return "toy_upsampler"; }
  [[nodiscard]] Shape output_shape(const Shape& input) const override;
  [[nodiscard]] std::uint64_t seed() const { return seed_; }

  struct Conv {
    std::size_t in = 0, out = 0;
    std::vector<double> weights;  // [out][in][3][3]
    std::vector<double> bias;     // [out]
  };

 protected:
  void check_input(const ImageTensor& x) const override;

 private:
  std::uint64_t seed_;
  std::size_t input_channels_;
  std::size_t features_;
  Conv head_, branch_, merge_;
  std::vector<double> decode_;  // [channel][feature]
  std::vector<double> decode_bias_;
};

/// 3x3 same-padding (edge replicate) convolution.
ImageTensor conv3x3(const ImageTensor& x, const ToyUpsamplerModel::Conv& conv);
ImageTensor relu(ImageTensor x);
ImageTensor upsample_nearest(const ImageTensor& x, std::size_t factor);
/// Half-pixel-centred bilinear x2 upsampling with edge clamping.
ImageTensor upsample_bilinear2(const ImageTensor& x);
ImageTensor box_downsample(const ImageTensor& x, std::size_t factor);

/// Piecewise-smooth test scene in [0, 1]: a gentle gradient plus seeded
/// rectangles and discs, so images have both flat regions and sharp edges.
ImageTensor synthetic_scene(std::size_t height, std::size_t width,
                            std::size_t channels, std::uint64_t seed);

/// Factory used by the CLI: "analytic_linear", "nearest_upsampler",
/// "toy_upsampler". Throws ConfigError for unknown names.
struct ModelOptions {
  std::uint64_t seed = 0;
  std::size_t channels = 1;
  double a1 = 1.0, b1 = 0.0, a2 = 3.0, b2 = 0.0;
};
std::unique_ptr<BlackBoxModel> make_model(std::string_view name,
                                          const ModelOptions& options);

/// Integer output/input size ratio (1 or 2 for the built-in models).
std::size_t model_scale(const BlackBoxModel& model);

struct ImagePair {
  ImageTensor input;
  ImageTensor ground_truth;
};

/// Deterministic (input, ground truth) pair for a model. Upsampling models get
/// an HR scene as ground truth and its box-downsampled version as input; the
/// analytic model gets ground truth = forward(input) plus a seeded smooth
/// offset field so the perturbed-mean error is non-trivial.
ImagePair synthetic_pair(const BlackBoxModel& model, std::size_t height,
                         std::size_t width, std::size_t channels,
                         std::uint64_t seed);

}  // namespace infervar
