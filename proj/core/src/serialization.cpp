#include "infervar/serialization.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "infervar/error.hpp"

namespace infervar {

using nlohmann::json;

json to_json(const PerturbationSpec& spec) {
  json j;
  j["method"] = std::string(method_name(spec.method));
  switch (spec.method) {
    case PerturbationMethod::transform_set: {
      json names = json::array();
      for (const Transform& t : spec.transforms) names.push_back(transform_name(t));
      j["transforms"] = names;
      break;
    }
    case PerturbationMethod::gaussian_noise:
      j["sigma"] = spec.sigma.value_or(0.0);
      j["tap"] = spec.tap;
      break;
    case PerturbationMethod::dropout:
      j["rate"] = spec.rate.value_or(0.0);
      j["rescale"] = spec.rescale;
      j["tap"] = spec.tap;
      break;
  }
  j["samples"] = spec.sample_count;
  j["seed"] = spec.master_seed;
  return j;
}

PerturbationSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("perturbation spec must be a JSON object");
  try {
    PerturbationSpec spec;
    spec.method = parse_method(j.at("method").get<std::string>());
    if (j.contains("transforms")) {
      for (const auto& name : j.at("transforms")) spec.transforms.push_back(parse_transform(name.get<std::string>()));
    } else if (spec.method == PerturbationMethod::transform_set) {
      spec.transforms.assign(all_transforms().begin(), all_transforms().end());
    }
    if (j.contains("sigma")) spec.sigma = j.at("sigma").get<double>();
    if (j.contains("rate")) spec.rate = j.at("rate").get<double>();
    spec.rescale = j.value("rescale", true);
    spec.tap = j.value("tap", std::string{});
    const std::size_t default_samples =
        spec.method == PerturbationMethod::transform_set ? spec.transforms.size() : 8;
    spec.sample_count = j.value("samples", default_samples);
    spec.master_seed = j.value("seed", std::uint64_t{0});
    return spec;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad perturbation spec: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("bad perturbation spec: ") + e.what());
  }
}

json to_json(const LcmParams& params) {
  return json{{"window_radius", params.window_radius},
              {"weight_sigma", params.weight_sigma},
              {"max_iters", params.max_iters},
              {"tol", params.tol}};
}

LcmParams lcm_params_from_json(const json& j) {
  LcmParams p;
  try {
    p.window_radius = j.value("window_radius", p.window_radius);
    p.weight_sigma = j.value("weight_sigma", p.weight_sigma);
    p.max_iters = j.value("max_iters", p.max_iters);
    p.tol = j.value("tol", p.tol);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad segmentation parameters: ") + e.what());
  }
  return p;
}

json to_json(const EvaluationOptions& options) {
  return json{{"loss", std::string(loss_name(options.loss))},
              {"pooling", std::string(pooling_name(options.pooling))},
              {"sparsification_steps", options.sparsification_steps},
              {"nll_floor", options.nll_floor},
              {"patch_grid", {options.patch_rows, options.patch_cols}},
              {"segmentation", to_json(options.segmentation)}};
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

json to_json(const EvaluationReport& report) {
  json j;
  for (std::string_view variant : kMetricVariants) {
    const std::string name(variant);
    const auto corr = report.correlation.find(name);
    const auto area = report.ause.find(name);
    j["corr_" + name] = corr == report.correlation.end() ? json(nullptr) : optional_number(corr->second);
    j["ause_" + name] = area == report.ause.end() ? json(nullptr) : optional_number(area->second);
  }
  j["nll"] = optional_number(report.nll);
  j["mean_c"] = optional_number(report.mean_c);
  json tol = json::array();
  for (const ImageTolerability& t : report.tolerability) {
    tol.push_back(json{{"mean_c", t.mean_c},
                       {"epsilon", optional_number(t.epsilon)},
                       {"tolerable", t.tolerable ? json(*t.tolerable) : json(nullptr)}});
  }
  j["tolerability"] = tol;
  j["undefined"] = report.undefined;
  j["pooling"] = std::string(pooling_name(report.pooling));
  j["loss"] = std::string(loss_name(report.loss));
  j["image_count"] = report.image_count;
  j["spec"] = report.spec ? to_json(*report.spec) : json(nullptr);
  return j;
}

std::string format_number(double value) {
  if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string sparsification_csv(const SparsificationCurve& curve) {
  std::ostringstream out;
  out << "fraction,method,oracle\n";
  for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
    out << format_number(curve.fractions[i]) << ',' << format_number(curve.method[i]) << ','
        << format_number(curve.oracle[i]) << '\n';
  }
  return out.str();
}

std::string bound_csv(const BoundCurve& curve) {
  std::ostringstream out;
  out << "t,empirical,bound\n";
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    out << format_number(curve.t[i]) << ',' << format_number(curve.empirical[i]) << ','
        << (curve.bound[i] ? format_number(*curve.bound[i]) : std::string("invalid")) << '\n';
  }
  return out.str();
}

}  // namespace infervar
