#pragma once

#include "fodkq/sampling.hpp"
#include "fodkq/types.hpp"

#include <Eigen/Core>

namespace fodkq {

/// Coil sensitivities U^(c), one row per coil, one column per voxel.
struct SensitivityMap {
  Eigen::MatrixXcd maps;

  [[nodiscard]] int coils() const { return static_cast<int>(maps.rows()); }
  [[nodiscard]] static SensitivityMap unit(std::size_t voxels, int coils = 1) {
    return {Eigen::MatrixXcd::Ones(coils, static_cast<Eigen::Index>(voxels))};
  }
};

/// Smooth synthetic coil profiles (Gaussian falloff from coils placed on a
/// ring around the volume, each with its own constant phase), normalized so
/// the root sum of squares is 1 in every voxel.
[[nodiscard]] SensitivityMap synthetic_coil_sensitivities(const VolumeShape& shape, int coils);

/// Calibration terms of the measurement operator.
struct CalibrationData {
  Eigen::VectorXd s0;               // per voxel, >= 0
  SensitivityMap sensitivities;     // coils x voxels
  Eigen::MatrixXcd phase_maps;      // (gradient * coils + coil) x voxels; empty means identity

  [[nodiscard]] int coils() const { return sensitivities.coils(); }
  [[nodiscard]] bool has_phase() const { return phase_maps.size() != 0; }
  /// Throws DataError when phase entries are not unit modulus or sizes disagree.
  void validate(std::size_t voxels, int gradients) const;
};

/// Phase maps from the fully sampled central zone of each (gradient, coil)
/// k-space: zero-fill everything outside the zone, inverse DFT, keep
/// z / |z| (1 where |z| < 1e-12). `kspace` rows are full k-space volumes
/// laid out like the voxel grid.
[[nodiscard]] Eigen::MatrixXcd estimate_phase(const Eigen::MatrixXcd& kspace, const VolumeShape& shape,
                                              double central_fraction);

/// Root-sum-of-squares normalization of per-coil images (one row per coil).
/// Voxels where every coil is zero get sensitivity 0.
[[nodiscard]] SensitivityMap estimate_sensitivities(const Eigen::MatrixXcd& coil_images);

}  // namespace fodkq
