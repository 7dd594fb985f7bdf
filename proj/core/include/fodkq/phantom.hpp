#pragma once

#include "fodkq/calibration.hpp"
#include "fodkq/dictionary.hpp"
#include "fodkq/geometry.hpp"
#include "fodkq/measurements.hpp"
#include "fodkq/sampling.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace fodkq {

struct LineCenterline {
  Vec3 from;
  Vec3 to;
};

/// Circular arc c + r (cos t u + sin t v), t in [start_deg, end_deg].
struct ArcCenterline {
  Vec3 center;
  double radius = 1.0;
  double start_deg = 0.0;
  double end_deg = 90.0;
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();
};

using Centerline = std::variant<LineCenterline, ArcCenterline>;

struct ClosestPoint {
  double distance = 0.0;
  Vec3 tangent;  // unit
};

[[nodiscard]] ClosestPoint closest_point(const Centerline& curve, const Vec3& p);
/// Point at parameter s in [0, 1] along the curve.
[[nodiscard]] Vec3 curve_point(const Centerline& curve, double s);

struct Bundle {
  Centerline centerline;
  double radius = 2.0;  // voxels
  int weight = 1;       // 1..5
};

enum class PhaseMode { None, Linear };

[[nodiscard]] PhaseMode parse_phase_mode(const std::string& s);
[[nodiscard]] std::string to_string(PhaseMode m);

struct PhantomSpec {
  VolumeShape volume_shape{16, 16, 5};
  std::vector<Bundle> bundles;
  double snr = 30.0;
  PhaseMode phase_mode = PhaseMode::None;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on empty bundle lists, bad weights or radii.
  void validate() const;
};

/// Parse a phantom document. Schema:
///   {"volume_shape": [nx, ny, nz], "snr": 30, "phase_mode": "none"|"linear", "seed": 0,
///    "bundles": [{"radius": r, "weight": w,
///                 "centerline": {"type": "line", "from": [x,y,z], "to": [x,y,z]}
///                             | {"type": "arc", "center": [x,y,z], "radius": R,
///                                "start_deg": a, "end_deg": b, "u": [..], "v": [..]}}]}
[[nodiscard]] PhantomSpec parse_phantom_spec(const std::string& json_text);
[[nodiscard]] std::string phantom_spec_to_json(const PhantomSpec& spec);

struct FiberEntry {
  Vec3 direction;
  double fraction = 0.0;
};

struct GroundTruth {
  VolumeShape shape;
  std::vector<std::vector<FiberEntry>> fibers;  // per voxel
  Eigen::VectorXd s0;                           // per voxel

  [[nodiscard]] std::size_t fiber_voxel_count() const;
};

/// Voxels whose center lies within a bundle radius receive the bundle's
/// local tangent; co-located bundles share the voxel equally; s0 is the sum
/// of the weights of the bundles present. Throws DataError("bundle out of
/// bounds") when a centerline leaves the volume.
[[nodiscard]] GroundTruth rasterize_phantom(const PhantomSpec& spec);

/// Replace every fiber direction by its nearest dictionary direction,
/// merging fibers that land on the same direction.
[[nodiscard]] GroundTruth snap_to_grid(const GroundTruth& gt, const DirectionSet& dirs);

/// Gaussian mixture signal, q-points x voxels: s0 * sum_i f_i exp(-b qhat^T D_i qhat).
[[nodiscard]] Eigen::MatrixXd synthesize_q_signal(const GroundTruth& gt, const QScheme& q, const TensorParams& wm);

struct Acquisition {
  KqMeasurements measurements;
  Eigen::MatrixXcd true_phase;  // (gradient * coils + coil) x voxels; empty for PhaseMode::None
};

/// Per (gradient, slice): optional random linear phase (k-space shift
/// uniform in [-2, 2] pixels per axis), coil weighting, unitary DFT,
/// complex Gaussian noise with per-component sigma = mean(nonzero s0) / snr
/// (snr = +inf disables noise), then masking. Row 0 of `signal` is s0.
[[nodiscard]] Acquisition acquire(const Eigen::MatrixXd& signal, const VolumeShape& shape, const SamplingMask& masks,
                                  double snr, PhaseMode phase_mode, const SensitivityMap& sens, std::uint64_t seed);

/// Linear phase exp(i 2 pi (sx x / nx + sy y / ny)) over one slice.
[[nodiscard]] Eigen::VectorXcd linear_phase_slice(int rows, int cols, double shift_rows, double shift_cols);

}  // namespace fodkq
