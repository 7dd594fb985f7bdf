#pragma once

#include "fodkq/geometry.hpp"

#include <Eigen/Core>

#include <vector>

namespace fodkq {

/// Diffusivities of a cylindrically oriented tensor, mm^2/s.
struct TensorParams {
  double lambda1 = 17e-4;  // longitudinal
  double lambda2 = 3e-4;
  double lambda3 = 3e-4;

  /// Throws std::invalid_argument unless lambda1 >= lambda2 >= lambda3 > 0.
  void validate() const;
};

inline constexpr double kGrayMatterDiffusivity = 17e-4;
inline constexpr double kCsfDiffusivity = 30e-4;

enum class AtomKind { Fiber, IsoGrayMatter, IsoCsf };

struct ResponseDictionary {
  Eigen::MatrixXd matrix;  // q-points x atoms
  QScheme q_scheme;
  DirectionSet fiber_dirs;
  std::vector<AtomKind> atom_kinds;
  TensorParams white_matter;
  std::vector<double> iso_diffusivities;

  [[nodiscard]] std::size_t fiber_count() const { return fiber_dirs.size(); }
  [[nodiscard]] std::size_t atom_count() const { return static_cast<std::size_t>(matrix.cols()); }
  [[nodiscard]] std::size_t q_count() const { return static_cast<std::size_t>(matrix.rows()); }
  /// Column of the gray-matter atom (first isotropic atom).
  [[nodiscard]] std::size_t gm_column() const { return fiber_count(); }
  /// Column of the CSF atom; only valid with two isotropic atoms.
  [[nodiscard]] std::size_t csf_column() const { return fiber_count() + 1; }
  [[nodiscard]] bool has_csf() const { return iso_diffusivities.size() >= 2; }
};

/// Diffusion tensor of `wm` with its principal axis rotated onto `d`.
/// In the unrotated frame the principal axis is z: diag(lambda2, lambda3, lambda1).
[[nodiscard]] Eigen::Matrix3d rotate_tensor(const TensorParams& wm, const Vec3& d);

/// Single-fiber response exp(-b qhat^T D qhat) for a fiber along `fiber`.
[[nodiscard]] double fiber_response(const TensorParams& wm, const Vec3& fiber, double b_value, const Vec3& qhat);

/// Fiber atoms in `dirs` order followed by one isotropic atom per entry of
/// `iso` (one entry: synthetic mode, two entries: gray matter + CSF).
[[nodiscard]] ResponseDictionary build_dictionary(const QScheme& q, const DirectionSet& dirs, const TensorParams& wm,
                                                  const std::vector<double>& iso);

}  // namespace fodkq
