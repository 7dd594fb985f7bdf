#pragma once

#include <fodkq/phantom.hpp>
#include <fodkq/solver.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fodkq::cli {

struct Seeds {
  std::uint64_t phantom = 0;
  std::uint64_t noise = 1;
  std::uint64_t masks = 2;
  std::uint64_t directions = 3;
};

enum class PhaseEstimation { True, Estimated };

/// One experiment. Relative paths inside the config document resolve
/// against the directory holding it.
struct ExperimentConfig {
  PhantomSpec phantom;
  std::filesystem::path phantom_path;
  std::vector<int> q_points{60, 30, 20, 15, 10, 6};
  std::vector<double> k_accelerations{1.0, 3.3, 10.0};
  double snr = 30.0;
  PhaseMode phase_mode = PhaseMode::None;
  PhaseEstimation phase_estimation = PhaseEstimation::Estimated;
  double b_value = 2000.0;
  int full_q_points = 60;
  int dictionary_size = 200;
  int coils = 1;
  double central_fraction = 0.125;
  bool snap_to_grid = false;
  double kappa_per_voxel = 3.0;  // kappa = kappa_per_voxel * N1 unless solver.kappa is set
  bool kappa_explicit = false;
  SolverConfig solver;
  Seeds seeds;
  int repeat = 1;
  int workers = 1;
  std::filesystem::path output_dir = "fodkq_out";

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Dotted-path overrides such as {"solver.kappa", "5"}; values are parsed
/// as JSON when possible and as strings otherwise.
using Overrides = std::vector<std::pair<std::string, std::string>>;

[[nodiscard]] ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                                            const Overrides& overrides = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
[[nodiscard]] std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace fodkq::cli
