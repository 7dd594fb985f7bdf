#pragma once

#include "config.hpp"
#include "pipeline.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fodkq::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalError = 3 };

// Each command writes under cfg.output_dir and reports on `out`.
void cmd_phantom(const ExperimentConfig& cfg, std::ostream& out);
/// Returns the cell directory.
std::filesystem::path cmd_acquire(const ExperimentConfig& cfg, const CellKey& key, std::ostream& out);
/// Returns false when outputs already exist and `force` is off.
bool cmd_reconstruct(const ExperimentConfig& cfg, const std::filesystem::path& cell_dir, bool force, std::ostream& out);
EvaluationReport cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& cell_dir, std::ostream& out);
/// Returns the number of failed runs.
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);
void cmd_masks(const ExperimentConfig& cfg, const CellKey& key, std::ostream& out);

/// Ground truth persisted by cmd_phantom.
[[nodiscard]] GroundTruth load_ground_truth(const std::filesystem::path& dir);

/// Full command line entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fodkq::cli
