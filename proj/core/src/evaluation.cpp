#include "infervar/evaluation.hpp"

#include <algorithm>
#include <numeric>

#include "infervar/error.hpp"

namespace infervar {

std::string_view pooling_name(PoolingMode mode) {
  return mode == PoolingMode::pooled ? "pooled" : "per_image";
}

PoolingMode parse_pooling(std::string_view name) {
  if (name == "pooled") return PoolingMode::pooled;
  if (name == "per_image") return PoolingMode::per_image;
  throw ValidationError("unknown pooling mode '" + std::string(name) + "' (expected pooled or per_image)");
}

namespace {

struct RegionMaps {
  std::vector<double> uncertainty;
  std::vector<double> error;
};

std::optional<double> average_defined(const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

// Fills report entries for one region-level variant (pixel, block or patch)
// from per-image replaced maps.
void evaluate_variant(const std::string& name, const std::vector<RegionMaps>& maps,
                      const EvaluationOptions& options, EvaluationReport& report) {
  if (options.pooling == PoolingMode::pooled) {
    RegionMaps all;
    for (const RegionMaps& m : maps) {
      all.uncertainty.insert(all.uncertainty.end(), m.uncertainty.begin(), m.uncertainty.end());
      all.error.insert(all.error.end(), m.error.begin(), m.error.end());
    }
    report.correlation[name] = pearson(all.uncertainty, all.error);
    if (!report.correlation[name]) report.undefined["corr_" + name] = "uncertainty or error is constant";
    auto curve = sparsification(all.uncertainty, all.error, options.sparsification_steps);
    if (curve) {
      report.ause[name] = ause(*curve);
      report.curves[name] = std::move(*curve);
    } else {
      report.ause[name] = std::nullopt;
      report.undefined["ause_" + name] = "total error is zero";
    }
    return;
  }

  std::vector<std::optional<double>> corrs, auses;
  for (const RegionMaps& m : maps) {
    corrs.push_back(pearson(m.uncertainty, m.error));
    auto curve = sparsification(m.uncertainty, m.error, options.sparsification_steps);
    auses.push_back(curve ? std::optional<double>(ause(*curve)) : std::nullopt);
  }
  report.correlation[name] = average_defined(corrs);
  report.ause[name] = average_defined(auses);
  if (!report.correlation[name]) report.undefined["corr_" + name] = "undefined on every image";
  if (!report.ause[name]) report.undefined["ause_" + name] = "undefined on every image";
}

std::vector<double> to_vector(const ImageTensor& t) { return {t.values().begin(), t.values().end()}; }

}  // namespace

EvaluationReport evaluate(const std::vector<ImageEvaluationInput>& images,
                          const EvaluationOptions& options, const std::vector<double>& epsilons) {
  if (images.empty()) throw ValidationError("evaluate needs at least one image");
  if (!epsilons.empty() && epsilons.size() != images.size()) {
    throw ValidationError("evaluate: got " + std::to_string(epsilons.size()) + " epsilons for " +
                          std::to_string(images.size()) + " images");
  }

  EvaluationReport report;
  report.pooling = options.pooling;
  report.loss = options.loss;
  report.image_count = images.size();

  std::vector<RegionMaps> pixel_maps, block_maps, patch_maps;
  std::vector<ImageMeans> means;
  bool have_labels = true;
  std::string patch_problem;
  for (const ImageEvaluationInput& img : images) {
    const ImageTensor v = pixel_uncertainty(img.uncertainty);
    const ImageTensor& e = img.error.values;
    require_same_shape(e, v, "evaluate (uncertainty vs error)");
    pixel_maps.push_back({to_vector(v), to_vector(e)});
    means.push_back(ImageMeans{mean(v.values()), mean(e.values())});

    if (img.labels) {
      block_maps.push_back({to_vector(region_means(v, *img.labels)), to_vector(region_means(e, *img.labels))});
    } else {
      have_labels = false;
    }
    if (patch_problem.empty()) {
      try {
        const SegmentationLabels patches =
            patch_labels(e.height(), e.width(), options.patch_rows, options.patch_cols);
        patch_maps.push_back({to_vector(region_means(v, patches)), to_vector(region_means(e, patches))});
      } catch (const ValidationError& err) {
        patch_problem = err.what();
      }
    }
  }

  evaluate_variant("pixel", pixel_maps, options, report);

  if (images.size() >= 2) {
    report.correlation["mean"] = mean_correlation(means);
    if (!report.correlation["mean"]) report.undefined["corr_mean"] = "per-image means are constant";
    std::vector<double> mv, me;
    for (const ImageMeans& m : means) {
      mv.push_back(m.mean_variance);
      me.push_back(m.mean_error);
    }
    auto curve = sparsification(mv, me, options.sparsification_steps);
    if (curve) {
      report.ause["mean"] = ause(*curve);
      report.curves["mean"] = std::move(*curve);
    } else {
      report.ause["mean"] = std::nullopt;
      report.undefined["ause_mean"] = "total error is zero";
    }
  } else {
    report.correlation["mean"] = std::nullopt;
    report.ause["mean"] = std::nullopt;
    report.undefined["corr_mean"] = "needs at least 2 images";
    report.undefined["ause_mean"] = "needs at least 2 images";
  }

  if (have_labels) {
    evaluate_variant("block", block_maps, options, report);
  } else {
    report.correlation["block"] = std::nullopt;
    report.ause["block"] = std::nullopt;
    report.undefined["corr_block"] = report.undefined["ause_block"] = "no segmentation labels";
  }

  if (patch_problem.empty()) {
    evaluate_variant("patch", patch_maps, options, report);
  } else {
    report.correlation["patch"] = std::nullopt;
    report.ause["patch"] = std::nullopt;
    report.undefined["corr_patch"] = report.undefined["ause_patch"] = patch_problem;
  }

  const bool have_truth = std::all_of(images.begin(), images.end(),
                                      [](const ImageEvaluationInput& i) { return i.ground_truth.has_value(); });
  if (have_truth) {
    double nll_sum = 0.0, weight = 0.0, c_sum = 0.0;
    for (std::size_t k = 0; k < images.size(); ++k) {
      const ImageEvaluationInput& img = images[k];
      const double value = nll(img.uncertainty, *img.ground_truth, options.nll_floor);
      const double w = options.pooling == PoolingMode::pooled ? static_cast<double>(img.ground_truth->size()) : 1.0;
      nll_sum += w * value;
      weight += w;

      const TolerabilityRecord rec =
          tolerability(img.uncertainty.mean, *img.ground_truth, epsilons.empty() ? 0.0 : epsilons[k]);
      ImageTolerability t{rec.mean_c, std::nullopt, std::nullopt};
      if (!epsilons.empty()) {
        t.epsilon = rec.epsilon;
        t.tolerable = rec.tolerable;
      }
      report.tolerability.push_back(t);
      c_sum += rec.mean_c;
    }
    report.nll = nll_sum / weight;
    report.mean_c = c_sum / static_cast<double>(images.size());
  } else {
    report.undefined["nll"] = "no ground truth";
    report.undefined["tolerability"] = "no ground truth";
  }
  return report;
}

}  // namespace infervar
