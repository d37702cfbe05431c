#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "infervar/bound.hpp"
#include "infervar/error.hpp"
#include "infervar/estimate.hpp"
#include "infervar/evaluation.hpp"
#include "infervar/segment.hpp"
#include "infervar/serialization.hpp"
#include "infervar/tensor_io.hpp"

namespace infervar::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_%03zu", i);
  return stem + buf + ext;
}

json model_json(const RunConfig& cfg) {
  json j{{"name", cfg.model}, {"seed", cfg.model_options.seed}, {"channels", cfg.model_options.channels}};
  if (cfg.model == "analytic_linear") {
    j["a1"] = cfg.model_options.a1;
    j["b1"] = cfg.model_options.b1;
    j["a2"] = cfg.model_options.a2;
    j["b2"] = cfg.model_options.b2;
  }
  return j;
}

std::string csv_value(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Model outputs needed by every model-driven command.
struct ModelRun {
  std::vector<ImagePair> data;
  std::vector<ImageTensor> predictions;
  std::vector<SegmentationLabels> labels;
};

ModelRun prepare_run(const RunConfig& cfg, const BlackBoxModel& model) {
  ModelRun run;
  run.data = load_dataset(cfg, model);
  for (const ImagePair& pair : run.data) {
    run.predictions.push_back(model.forward(pair.input));
    require_same_shape(pair.ground_truth, run.predictions.back(), "model output vs ground truth");
    run.labels.push_back(lcm_segment(run.predictions.back(), cfg.metrics.segmentation));
  }
  return run;
}

std::vector<ImageEvaluationInput> evaluation_inputs(const RunConfig& cfg, const ModelRun& run,
                                                    const std::vector<UncertaintyMap>& maps) {
  std::vector<ImageEvaluationInput> inputs;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const ImageTensor& prediction =
        cfg.prediction == PredictionSource::original ? run.predictions[i] : maps[i].mean;
    inputs.push_back(ImageEvaluationInput{maps[i], error_map(prediction, run.data[i].ground_truth, cfg.metrics.loss),
                                          run.data[i].ground_truth, run.labels[i]});
  }
  return inputs;
}

std::vector<double> default_epsilons(const ModelRun& run) {
  std::vector<double> eps;
  for (std::size_t i = 0; i < run.data.size(); ++i)
    eps.push_back(default_epsilon(run.predictions[i], run.data[i].ground_truth));
  return eps;
}

void write_curves(const fs::path& dir, const std::string& prefix, const EvaluationReport& report) {
  for (const auto& [name, curve] : report.curves)
    write_text(dir / (prefix + "sparsification_" + name + ".csv"), sparsification_csv(curve));
}

}  // namespace

std::unique_ptr<BlackBoxModel> build_model(const RunConfig& config) {
  return make_model(config.model, config.model_options);
}

std::vector<ImagePair> load_dataset(const RunConfig& config, const BlackBoxModel& model) {
  std::vector<ImagePair> data;
  if (!config.inputs.empty()) {
    if (config.ground_truth.size() != config.inputs.size()) {
      throw ConfigError("model-driven commands need one ground_truth path per input");
    }
    for (std::size_t i = 0; i < config.inputs.size(); ++i)
      data.push_back(ImagePair{read_image(config.inputs[i]), read_image(config.ground_truth[i])});
    return data;
  }
  const SyntheticDataset& s = config.synthetic;
  for (std::size_t i = 0; i < s.count; ++i)
    data.push_back(synthetic_pair(model, s.height, s.width, s.channels, s.seed + i));
  return data;
}

void cmd_estimate(const RunConfig& cfg, std::ostream& log) {
  const auto model = build_model(cfg);
  const PerturbationSpec spec = cfg.spec();
  const std::vector<ImagePair> data = load_dataset(cfg, *model);
  ensure_dir(cfg.output_dir);

  json images = json::array();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto start = Clock::now();
    const UncertaintyMap u = variance_map(sample(*model, data[i].input, spec, cfg.threads));
    const ImageTensor prediction = model->forward(data[i].input);
    const double elapsed = seconds_since(start);

    json entry{{"index", i},
               {"variance", indexed("variance", i, ".ten")},
               {"mean", indexed("mean", i, ".ten")},
               {"log_variance", indexed("log_variance", i, ".ten")},
               {"prediction", indexed("prediction", i, ".ten")},
               {"ground_truth", indexed("ground_truth", i, ".ten")},
               {"sample_count", u.sample_count}};
    if (!cfg.inputs.empty()) entry["input"] = cfg.inputs[i].string();
    if (cfg.record_timings) entry["seconds"] = elapsed;
    write_ten1(cfg.output_dir / entry["variance"].get<std::string>(), u.variance);
    write_ten1(cfg.output_dir / entry["mean"].get<std::string>(), u.mean);
    write_ten1(cfg.output_dir / entry["log_variance"].get<std::string>(), log_variance(u.variance));
    write_ten1(cfg.output_dir / entry["prediction"].get<std::string>(), prediction);
    write_ten1(cfg.output_dir / entry["ground_truth"].get<std::string>(), data[i].ground_truth);
    images.push_back(std::move(entry));
  }
  const json meta{{"model", model_json(cfg)}, {"spec", to_json(spec)}, {"seed", spec.master_seed}, {"images", images}};
  write_text(cfg.output_dir / "estimate.json", meta.dump(2) + "\n");
  log << "estimate: wrote " << data.size() << " uncertainty map(s) to " << cfg.output_dir.string() << "\n";
}

void cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  const EvaluateInputs& in = cfg.evaluate;
  const std::size_t n = in.uncertainty.size();
  if (n == 0) throw ConfigError("evaluate needs evaluate.uncertainty paths");
  const auto check_count = [n](const std::vector<fs::path>& v, const char* what) {
    if (!v.empty() && v.size() != n)
      throw ConfigError(std::string("evaluate.") + what + " must list one path per uncertainty map");
  };
  check_count(in.errors, "errors");
  check_count(in.predictions, "predictions");
  check_count(in.means, "means");
  check_count(in.segment_source, "segment_source");
  check_count(cfg.ground_truth, "ground_truth");
  if (in.errors.empty() && (in.predictions.empty() || cfg.ground_truth.empty())) {
    throw ConfigError("evaluate needs evaluate.errors, or evaluate.predictions with ground_truth");
  }

  std::vector<ImageEvaluationInput> images;
  std::vector<double> epsilons;
  for (std::size_t i = 0; i < n; ++i) {
    UncertaintyMap u;
    u.variance = read_image(in.uncertainty[i]);
    u.mean = in.means.empty() ? u.variance : read_image(in.means[i]);
    std::optional<ImageTensor> truth;
    if (!cfg.ground_truth.empty()) truth = read_image(cfg.ground_truth[i]);

    ErrorMap err;
    if (!in.errors.empty()) {
      err = ErrorMap{read_image(in.errors[i]).channel_mean(), cfg.metrics.loss};
      for (double v : err.values.values())
        if (v < 0.0) throw ValidationError(in.errors[i].string() + ": error values must be >= 0");
    } else {
      err = error_map(read_image(in.predictions[i]), *truth, cfg.metrics.loss);
    }

    std::optional<SegmentationLabels> labels;
    if (!in.segment_source.empty()) {
      labels = lcm_segment(read_image(in.segment_source[i]), cfg.metrics.segmentation);
    } else if (!in.predictions.empty()) {
      labels = lcm_segment(read_image(in.predictions[i]), cfg.metrics.segmentation);
    }

    if (in.epsilon) {
      epsilons.push_back(*in.epsilon);
    } else if (!in.predictions.empty() && truth) {
      epsilons.push_back(default_epsilon(read_image(in.predictions[i]), *truth));
    }
    // NLL and tolerability need a real mean map next to the ground truth.
    images.push_back(ImageEvaluationInput{std::move(u), std::move(err),
                                          in.means.empty() ? std::nullopt : truth, std::move(labels)});
  }
  if (epsilons.size() != n) epsilons.clear();

  const EvaluationReport report = evaluate(images, cfg.metrics, epsilons);
  ensure_dir(cfg.output_dir);
  const json doc{{"report", to_json(report)}, {"options", to_json(cfg.metrics)}};
  write_text(cfg.output_dir / "report.json", doc.dump(2) + "\n");
  write_curves(cfg.output_dir, "", report);
  log << "evaluate: " << n << " image(s), report at " << (cfg.output_dir / "report.json").string() << "\n";
}

void cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (cfg.sweep.taps.empty()) throw ConfigError("sweep needs a 'sweep' section with taps and strengths");
  const auto model = build_model(cfg);
  const auto* gray = dynamic_cast<const GrayBoxModel*>(model.get());
  if (gray == nullptr) throw ConfigError("sweep needs a gray-box model, got " + model->name());
  for (const std::string& tap : cfg.sweep.taps) (void)gray->tap(tap);

  std::uint64_t seed = 0;
  if (cfg.perturbation.is_object()) seed = cfg.perturbation.value("seed", std::uint64_t{0});
  const ModelRun run = prepare_run(cfg, *model);
  ensure_dir(cfg.output_dir);

  std::ostringstream csv;
  csv << "method,tap,strength,mean_c,corr_pixel,corr_mean,corr_block,corr_patch\n";
  std::size_t rows = 0;
  const auto emit = [&](PerturbationMethod method, const std::vector<double>& strengths) {
    for (const std::string& tap : cfg.sweep.taps) {
      for (double s : strengths) {
        const PerturbationSpec spec = method == PerturbationMethod::gaussian_noise
                                          ? noise_spec(tap, s, cfg.sweep.samples, seed)
                                          : dropout_spec(tap, s, cfg.sweep.samples, seed);
        std::vector<UncertaintyMap> maps;
        for (const ImagePair& pair : run.data)
          maps.push_back(variance_map(sample_graybox(*gray, pair.input, spec, cfg.threads)));
        const EvaluationReport report = evaluate(evaluation_inputs(cfg, run, maps), cfg.metrics);
        csv << method_name(method) << ',' << tap << ',' << format_number(s) << ','
            << csv_value(report.mean_c) << ',' << csv_value(report.correlation.at("pixel")) << ','
            << csv_value(report.correlation.at("mean")) << ',' << csv_value(report.correlation.at("block"))
            << ',' << csv_value(report.correlation.at("patch")) << '\n';
        ++rows;
      }
    }
  };
  emit(PerturbationMethod::gaussian_noise, cfg.sweep.sigmas);
  emit(PerturbationMethod::dropout, cfg.sweep.rates);
  write_text(cfg.output_dir / "sweep.csv", csv.str());
  log << "sweep: " << rows << " grid point(s) written to " << (cfg.output_dir / "sweep.csv").string() << "\n";
}

void cmd_bound(const RunConfig& cfg, std::ostream& log) {
  if (cfg.bound.pixels.empty()) throw ConfigError("bound needs bound.pixels");
  const auto model = build_model(cfg);
  const PerturbationSpec spec = cfg.spec();
  const std::vector<ImagePair> data = load_dataset(cfg, *model);
  if (cfg.bound.image >= data.size()) {
    throw ConfigError("bound.image " + std::to_string(cfg.bound.image) + " out of range");
  }
  const ImagePair& pair = data[cfg.bound.image];
  const SampleSet set = sample(*model, pair.input, spec, cfg.threads);
  require_same_shape(pair.ground_truth, set.samples.front(), "bound (ground truth vs samples)");
  if (set.size() < kMinTailSamples) {
    log << "bound: warning: only " << set.size() << " samples; empirical tails will be noisy (< "
        << kMinTailSamples << ")\n";
  }
  ensure_dir(cfg.output_dir);

  json pixels = json::array();
  for (std::size_t k = 0; k < cfg.bound.pixels.size(); ++k) {
    const auto [row, col] = cfg.bound.pixels[k];
    const PixelCoord pixel{row, col, 0};
    if (row >= pair.ground_truth.height() || col >= pair.ground_truth.width()) {
      throw ValidationError("bound pixel (" + std::to_string(row) + ", " + std::to_string(col) +
                            ") out of range for " + to_string(pair.ground_truth.shape()));
    }
    const double y = pair.ground_truth.at(row, col, 0);
    std::vector<double> grid = cfg.bound.t_grid;
    if (grid.empty()) {
      const BoundCurve stats = bound_curve(set, y, pixel, {});
      const double t_max = stats.c + 6.0 * std::sqrt(stats.variance);
      grid = linear_grid(0.0, t_max > 0.0 ? t_max : 1e-3, cfg.bound.t_count);
    }
    const BoundCurve curve = bound_curve(set, y, pixel, grid);
    const std::string file = indexed("bound", k, ".csv");
    write_text(cfg.output_dir / file, bound_csv(curve));
    pixels.push_back(json{{"row", row},
                          {"col", col},
                          {"file", file},
                          {"variance", curve.variance},
                          {"c", curve.c},
                          {"gap_area", bound_gap_area(curve)},
                          {"sample_count", curve.sample_count},
                          {"low_sample_count", curve.low_sample_count}});
  }
  const json meta{{"model", model_json(cfg)}, {"spec", to_json(spec)}, {"image", cfg.bound.image}, {"pixels", pixels}};
  write_text(cfg.output_dir / "bound.json", meta.dump(2) + "\n");
  log << "bound: " << cfg.bound.pixels.size() << " pixel curve(s) written to " << cfg.output_dir.string() << "\n";
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
  const auto model = build_model(cfg);
  const PerturbationSpec spec = cfg.spec();
  const ModelRun run = prepare_run(cfg, *model);

  std::vector<UncertaintyMap> maps, oracle_maps;
  for (const ImagePair& pair : run.data) {
    maps.push_back(variance_map(sample(*model, pair.input, spec, cfg.threads)));
    const UncertaintyMap& u = maps.back();
    const TolerabilityRecord c = tolerability(u.mean, pair.ground_truth, 0.0);
    oracle_maps.push_back(UncertaintyMap{oracle_uncertainty(u, c.pixel_c), u.mean, u.sample_count});
  }
  const std::vector<double> eps = default_epsilons(run);
  EvaluationReport method = evaluate(evaluation_inputs(cfg, run, maps), cfg.metrics, eps);
  EvaluationReport oracle = evaluate(evaluation_inputs(cfg, run, oracle_maps), cfg.metrics, eps);
  method.spec = spec;
  oracle.spec = spec;

  ensure_dir(cfg.output_dir);
  const json doc{{"model", model_json(cfg)},
                 {"options", to_json(cfg.metrics)},
                 {"prediction", cfg.prediction == PredictionSource::original ? "original" : "mean"},
                 {"method", to_json(method)},
                 {"oracle", to_json(oracle)}};
  write_text(cfg.output_dir / "report.json", doc.dump(2) + "\n");
  write_curves(cfg.output_dir, "method_", method);
  write_curves(cfg.output_dir, "oracle_", oracle);
  for (std::size_t i = 0; i < run.labels.size(); ++i) {
    write_ten1(cfg.output_dir / indexed("labels", i, ".ten"), labels_to_tensor(run.labels[i]));
    write_png(cfg.output_dir / indexed("labels", i, ".png"), labels_preview(run.labels[i]));
  }
  log << "report: " << run.data.size() << " image(s), report at " << (cfg.output_dir / "report.json").string() << "\n";
}

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_command(const std::string& command, const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (command == "estimate") {
      cmd_estimate(config, log);
    } else if (command == "evaluate") {
      cmd_evaluate(config, log);
    } else if (command == "sweep") {
      cmd_sweep(config, log);
    } else if (command == "bound") {
      cmd_bound(config, log);
    } else if (command == "report") {
      cmd_report(config, log);
    } else {
      err << "unknown command '" << command << "'\n";
      return 2;
    }
  } catch (...) {
    return exit_code_for_current_exception(err);
  }
  return 0;
}

}  // namespace infervar::cli
