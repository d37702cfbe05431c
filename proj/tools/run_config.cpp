#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include "infervar/error.hpp"
#include "infervar/serialization.hpp"

namespace infervar::cli {

using nlohmann::json;

PerturbationSpec RunConfig::spec() const {
  if (perturbation.is_null()) throw ConfigError("config has no 'perturbation' section");
  PerturbationSpec spec = spec_from_json(perturbation);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("invalid perturbation: ") + e.what());
  }
  return spec;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set expects key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--set key '" + key + "' has an empty component");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("--set key '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

namespace {

std::vector<std::filesystem::path> existing_paths(const json& doc, const char* key) {
  std::vector<std::filesystem::path> out;
  if (!doc.contains(key)) return out;
  for (const auto& p : doc.at(key)) {
    std::filesystem::path path = p.get<std::string>();
    if (!std::filesystem::exists(path)) throw IoError(std::string(key) + ": '" + path.string() + "' does not exist");
    out.push_back(std::move(path));
  }
  return out;
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig cfg;
  try {
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (m.is_string()) {
        cfg.model = m.get<std::string>();
      } else {
        cfg.model = m.value("name", cfg.model);
        cfg.model_options.seed = m.value("seed", cfg.model_options.seed);
        cfg.model_options.channels = m.value("channels", cfg.model_options.channels);
        cfg.model_options.a1 = m.value("a1", cfg.model_options.a1);
        cfg.model_options.b1 = m.value("b1", cfg.model_options.b1);
        cfg.model_options.a2 = m.value("a2", cfg.model_options.a2);
        cfg.model_options.b2 = m.value("b2", cfg.model_options.b2);
      }
    }

    cfg.inputs = existing_paths(doc, "inputs");
    cfg.ground_truth = existing_paths(doc, "ground_truth");
    if (!cfg.inputs.empty() && !cfg.ground_truth.empty() && cfg.ground_truth.size() != cfg.inputs.size()) {
      throw ConfigError("ground_truth must list one path per input");
    }
    if (doc.contains("synthetic")) {
      const json& s = doc.at("synthetic");
      cfg.synthetic.count = s.value("count", cfg.synthetic.count);
      cfg.synthetic.height = s.value("height", cfg.synthetic.height);
      cfg.synthetic.width = s.value("width", cfg.synthetic.width);
      cfg.synthetic.channels = s.value("channels", cfg.synthetic.channels);
      cfg.synthetic.seed = s.value("seed", cfg.synthetic.seed);
      if (cfg.synthetic.count == 0) throw ConfigError("synthetic.count must be >= 1");
    }

    cfg.perturbation = doc.value("perturbation", json());

    if (doc.contains("sweep")) {
      const json& s = doc.at("sweep");
      cfg.sweep.taps = s.value("taps", std::vector<std::string>{});
      cfg.sweep.sigmas = s.value("sigmas", std::vector<double>{});
      cfg.sweep.rates = s.value("rates", std::vector<double>{});
      cfg.sweep.samples = s.value("samples", cfg.sweep.samples);
      if (cfg.sweep.taps.empty() || (cfg.sweep.sigmas.empty() && cfg.sweep.rates.empty())) {
        throw ConfigError("sweep grid needs at least one tap and one sigma or rate");
      }
    }

    if (doc.contains("metrics")) {
      const json& m = doc.at("metrics");
      EvaluationOptions& o = cfg.metrics;
      o.loss = parse_loss(m.value("loss", std::string(loss_name(o.loss))));
      o.pooling = parse_pooling(m.value("pooling", std::string(pooling_name(o.pooling))));
      o.sparsification_steps = m.value("sparsification_steps", o.sparsification_steps);
      o.nll_floor = m.value("nll_floor", o.nll_floor);
      if (m.contains("patch_grid")) {
        const auto grid = m.at("patch_grid").get<std::vector<std::size_t>>();
        if (grid.size() != 2) throw ConfigError("metrics.patch_grid must be [rows, cols]");
        o.patch_rows = grid[0];
        o.patch_cols = grid[1];
      }
      if (m.contains("segmentation")) o.segmentation = lcm_params_from_json(m.at("segmentation"));
      const std::string pred = m.value("prediction", std::string("original"));
      if (pred == "original") {
        cfg.prediction = PredictionSource::original;
      } else if (pred == "mean" || pred == "perturbed_mean") {
        cfg.prediction = PredictionSource::perturbed_mean;
      } else {
        throw ConfigError("metrics.prediction must be 'original' or 'mean'");
      }
    }

    if (doc.contains("evaluate")) {
      const json& e = doc.at("evaluate");
      cfg.evaluate.uncertainty = existing_paths(e, "uncertainty");
      cfg.evaluate.errors = existing_paths(e, "errors");
      cfg.evaluate.predictions = existing_paths(e, "predictions");
      cfg.evaluate.means = existing_paths(e, "means");
      cfg.evaluate.segment_source = existing_paths(e, "segment_source");
      if (e.contains("epsilon")) cfg.evaluate.epsilon = e.at("epsilon").get<double>();
    }

    if (doc.contains("bound")) {
      const json& b = doc.at("bound");
      cfg.bound.image = b.value("image", cfg.bound.image);
      for (const auto& p : b.value("pixels", json::array())) {
        const auto rc = p.get<std::vector<std::size_t>>();
        if (rc.size() != 2) throw ConfigError("bound.pixels entries must be [row, col]");
        cfg.bound.pixels.emplace_back(rc[0], rc[1]);
      }
      cfg.bound.t_grid = b.value("t_grid", std::vector<double>{});
      cfg.bound.t_count = b.value("t_count", cfg.bound.t_count);
    }

    cfg.output_dir = doc.value("output_dir", cfg.output_dir.string());
    cfg.threads = doc.value("threads", cfg.threads);
    cfg.record_timings = doc.value("record_timings", cfg.record_timings);
    if (cfg.threads == 0) throw ConfigError("threads must be >= 1");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw IoError("cannot open config '" + path->string() + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config '" + path->string() + "' is not valid JSON: " + e.what());
    }
  }
  for (const std::string& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace infervar::cli
