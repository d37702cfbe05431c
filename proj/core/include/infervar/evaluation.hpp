#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infervar/bound.hpp"
#include "infervar/estimate.hpp"
#include "infervar/metrics.hpp"
#include "infervar/perturb.hpp"
#include "infervar/segment.hpp"

namespace infervar {

/// How pixel-, block- and patch-level metrics combine across images:
/// `pooled` concatenates all pixels of the dataset, `per_image` averages the
/// per-image values over images where the metric is defined.
enum class PoolingMode { pooled, per_image };

std::string_view pooling_name(PoolingMode mode);
PoolingMode parse_pooling(std::string_view name);

struct EvaluationOptions {
  LossKind loss = LossKind::l1;
  PoolingMode pooling = PoolingMode::pooled;
  std::size_t sparsification_steps = kDefaultSparsificationSteps;
  double nll_floor = kDefaultNllFloor;
  std::size_t patch_rows = 10;
  std::size_t patch_cols = 10;
  LcmParams segmentation;
};

/// Everything the metric suite needs for one image. `variance`/`mean` come
/// from the estimator; `error` is the loss of the evaluated prediction.
struct ImageEvaluationInput {
  UncertaintyMap uncertainty;
  ErrorMap error;
  std::optional<ImageTensor> ground_truth;   // enables NLL and tolerability
  std::optional<SegmentationLabels> labels;  // enables block metrics
};

struct ImageTolerability {
  double mean_c = 0.0;
  std::optional<double> epsilon;
  std::optional<bool> tolerable;  // set only when epsilon is known
};

/// Metric name -> value; nullopt marks an undefined metric, with the reason
/// recorded in `undefined`.
struct EvaluationReport {
  std::map<std::string, std::optional<double>> correlation;  // pixel/mean/block/patch
  std::map<std::string, std::optional<double>> ause;
  std::optional<double> nll;
  std::vector<ImageTolerability> tolerability;
  std::optional<double> mean_c;
  std::map<std::string, SparsificationCurve> curves;  // pooled curves only
  std::map<std::string, std::string> undefined;
  PoolingMode pooling = PoolingMode::pooled;
  LossKind loss = LossKind::l1;
  std::size_t image_count = 0;
  std::optional<PerturbationSpec> spec;
};

inline constexpr std::string_view kMetricVariants[] = {"pixel", "mean", "block", "patch"};

/// Evaluates a dataset. `epsilons` (empty, or one per image) sets the
/// tolerability threshold; without it only mean C is reported.
EvaluationReport evaluate(const std::vector<ImageEvaluationInput>& images,
                          const EvaluationOptions& options,
                          const std::vector<double>& epsilons = {});

}  // namespace infervar
