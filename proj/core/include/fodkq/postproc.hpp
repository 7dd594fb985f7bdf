#pragma once

#include "fodkq/geometry.hpp"
#include "fodkq/layout.hpp"
#include "fodkq/phantom.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace fodkq {

struct Peak {
  Vec3 direction;
  double amplitude = 0.0;
  std::size_t index = 0;  // dictionary direction
};

using PeakSet = std::vector<Peak>;

struct PeakOptions {
  double relative_threshold = 0.2;
  std::size_t max_peaks = 5;
  /// Report the summed coefficient mass over N(d) instead of s1[d].
  bool aggregate_cone = false;
};

/// Local maxima of a nonnegative column over the cone neighborhood. Ties
/// inside a neighborhood keep the lowest index. Sorted by descending
/// amplitude (then index).
[[nodiscard]] PeakSet extract_peaks(const Eigen::Ref<const Eigen::VectorXd>& s1_column, const DirectionSet& dirs,
                                    const AngularNeighborhood& nbh, const PeakOptions& opts = {});

/// Peaks for every voxel of the grid; voxels without fiber unknowns are empty.
struct PeakField {
  VolumeShape shape;
  std::vector<PeakSet> voxels;
};

[[nodiscard]] PeakField extract_peak_field(const FodField& field, const VolumeShape& shape, const DirectionSet& dirs,
                                           const AngularNeighborhood& nbh, const PeakOptions& opts = {});

/// One line per voxel holding at least one peak: "vx vy vz n d1x d1y d1z a1 ...".
void write_peaks(std::ostream& os, const PeakField& peaks);
[[nodiscard]] PeakField read_peaks(std::istream& is, const VolumeShape& shape);

enum class Matching { Greedy, Exhaustive };

struct VoxelDetail {
  std::size_t voxel = 0;
  std::size_t n_true = 0;
  std::size_t n_est = 0;
  bool success = false;
};

struct EvaluationReport {
  double success_rate = 0.0;
  std::vector<double> angular_errors;  // degrees, one per true fiber
  double mean_angular_error = 0.0;
  std::vector<VoxelDetail> per_voxel_detail;
};

/// Scores every voxel holding at least one true fiber. A voxel succeeds when
/// the counts agree and the one-to-one matching keeps every pair within
/// `tolerance_deg`. Each true fiber contributes the angle to its closest
/// estimate, or 90 degrees when the voxel has no estimates.
[[nodiscard]] EvaluationReport evaluate(const PeakField& est, const GroundTruth& truth, double tolerance_deg = 20.0,
                                        Matching matching = Matching::Greedy);

/// Single-voxel success test used by evaluate.
[[nodiscard]] bool voxel_success(const std::vector<Vec3>& truth, const std::vector<Vec3>& est, double tolerance_deg,
                                 Matching matching);

[[nodiscard]] std::string report_to_json(const EvaluationReport& report);

}  // namespace fodkq
