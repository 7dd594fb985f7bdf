#pragma once

#include "config.hpp"

#include <fodkq/calibration.hpp>
#include <fodkq/geometry.hpp>
#include <fodkq/phantom.hpp>
#include <fodkq/postproc.hpp>
#include <fodkq/sampling.hpp>
#include <fodkq/solver.hpp>

#include <Eigen/Core>

#include <functional>
#include <string>

namespace fodkq::cli {

/// Worker width: FODKQ_THREADS when set, else the hardware concurrency.
[[nodiscard]] int thread_budget();

struct CellKey {
  int q_points = 0;
  double acceleration = 1.0;
  int repetition = 0;

  /// Directory-safe identifier, e.g. "q30_a3.3_r0".
  [[nodiscard]] std::string id() const;
};

/// Everything shared by the cells of one experiment.
struct Scenario {
  GroundTruth truth;
  QScheme full_scheme;
  DirectionSet dictionary_dirs;
};

[[nodiscard]] Scenario build_scenario(const ExperimentConfig& cfg);

struct CellSeeds {
  std::uint64_t noise = 0;
  std::uint64_t masks = 0;
};

[[nodiscard]] CellSeeds cell_seeds(const ExperimentConfig& cfg, const CellKey& key);

struct AcquiredCell {
  QScheme scheme;
  Acquisition acquisition;
  SensitivityMap sensitivities;
  Eigen::MatrixXcd estimated_phase;  // empty without phase contamination
  double phase_agreement = 1.0;      // mean Re(conj(est) true) over nonempty voxels
};

[[nodiscard]] AcquiredCell acquire_cell(const ExperimentConfig& cfg, const Scenario& sc, const CellKey& key);

/// Phase maps estimated from the central zone of every (gradient, coil) block.
[[nodiscard]] Eigen::MatrixXcd estimate_phase_from_measurements(const KqMeasurements& m, const VolumeShape& shape);

[[nodiscard]] double phase_agreement(const Eigen::MatrixXcd& est, const Eigen::MatrixXcd& truth,
                                     const Eigen::VectorXd& s0);

struct Reconstruction {
  ReweightResult result;
  PeakField peaks;
  double kappa = 0.0;
  double seconds = 0.0;
  int total_iterations = 0;
};

/// Solves for the FOD field given measurements and calibration, then
/// extracts peaks.
[[nodiscard]] Reconstruction reconstruct(const ExperimentConfig& cfg, const Eigen::VectorXd& s0,
                                         const DirectionSet& dirs, const QScheme& scheme, const KqMeasurements& meas,
                                         const SensitivityMap& sens, const Eigen::MatrixXcd& phase,
                                         const std::function<void(const CycleLog&)>& on_cycle = {}, int threads = 0);

struct CellResult {
  CellKey key;
  double image_units = 0.0;
  EvaluationReport report;
  int total_iterations = 0;
  int cycles = 0;
  double seconds = 0.0;
  double phase_agreement = 1.0;
};

/// phantom -> acquire -> reconstruct -> evaluate, in memory.
/// `threads` <= 0 means thread_budget().
[[nodiscard]] CellResult run_cell(const ExperimentConfig& cfg, const Scenario& sc, const CellKey& key,
                                  const std::function<void(const CycleLog&)>& on_cycle = {}, int threads = 0);

}  // namespace fodkq::cli
