#pragma once

#include <nlohmann/json.hpp>

#include <string>

#include "infervar/bound.hpp"
#include "infervar/evaluation.hpp"
#include "infervar/perturb.hpp"
#include "infervar/segment.hpp"

namespace infervar {

nlohmann::json to_json(const PerturbationSpec& spec);
PerturbationSpec spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LcmParams& params);
LcmParams lcm_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const EvaluationOptions& options);
nlohmann::json to_json(const EvaluationReport& report);

/// Shortest round-trip decimal form; identical bits give identical text.
std::string format_number(double value);

/// "fraction,method,oracle" rows.
std::string sparsification_csv(const SparsificationCurve& curve);
/// "t,empirical,bound" rows; the bound column reads "invalid" where t <= C.
std::string bound_csv(const BoundCurve& curve);

}  // namespace infervar
