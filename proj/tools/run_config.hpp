#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "infervar/evaluation.hpp"
#include "infervar/models.hpp"
#include "infervar/perturb.hpp"

namespace infervar::cli {

struct SyntheticDataset {
  std::size_t count = 1;
  std::size_t height = 24;
  std::size_t width = 24;
  std::size_t channels = 1;
  std::uint64_t seed = 1;
};

struct SweepGrid {
  std::vector<std::string> taps;
  std::vector<double> sigmas;
  std::vector<double> rates;
  std::size_t samples = 8;
};

/// File-mode inputs for `evaluate`. Errors come either from `errors`
/// directly or from `predictions` against `ground_truth`.
struct EvaluateInputs {
  std::vector<std::filesystem::path> uncertainty;
  std::vector<std::filesystem::path> errors;
  std::vector<std::filesystem::path> predictions;
  std::vector<std::filesystem::path> means;
  std::vector<std::filesystem::path> segment_source;
  std::optional<double> epsilon;
};

struct BoundOptions {
  std::size_t image = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pixels;
  std::vector<double> t_grid;  // empty: automatic per-pixel grid
  std::size_t t_count = 50;
};

enum class PredictionSource { original, perturbed_mean };

struct RunConfig {
  std::string model = "toy_upsampler";
  ModelOptions model_options;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> ground_truth;
  SyntheticDataset synthetic;
  nlohmann::json perturbation;  // validated lazily by the commands that need it
  SweepGrid sweep;
  EvaluationOptions metrics;
  PredictionSource prediction = PredictionSource::original;
  EvaluateInputs evaluate;
  BoundOptions bound;
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;
  bool record_timings = false;

  [[nodiscard]] PerturbationSpec spec() const;
};

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON
/// when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Builds a RunConfig from a JSON document. Throws ConfigError on schema
/// problems and IoError when a referenced path does not exist.
RunConfig config_from_json(const nlohmann::json& doc);

/// Reads the config file (if any), applies overrides, then parses.
RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::string>& overrides);

}  // namespace infervar::cli
