#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "infervar/models.hpp"

namespace infervar::cli {

/// Loads inputs/ground truth from disk, or synthesizes them for the model.
std::vector<ImagePair> load_dataset(const RunConfig& config, const BlackBoxModel& model);
std::unique_ptr<BlackBoxModel> build_model(const RunConfig& config);

// Each command writes its artifacts under config.output_dir and throws an
// infervar::Error subclass on failure.
void cmd_estimate(const RunConfig& config, std::ostream& log);
void cmd_evaluate(const RunConfig& config, std::ostream& log);
void cmd_sweep(const RunConfig& config, std::ostream& log);
void cmd_bound(const RunConfig& config, std::ostream& log);
void cmd_report(const RunConfig& config, std::ostream& log);

/// Exit code for the current exception: 2 config, 3 I/O, 4 validation, 1 other.
int exit_code_for_current_exception(std::ostream& err);

/// Runs `command` by name; returns the process exit code.
int run_command(const std::string& command, const RunConfig& config, std::ostream& log,
                std::ostream& err);

}  // namespace infervar::cli
