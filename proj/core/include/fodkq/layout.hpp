#pragma once

#include "fodkq/types.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace fodkq {

/// Which voxels carry white matter (fiber FODs), gray matter and CSF.
/// Index lists are sorted; a voxel may appear in more than one list.
struct TissueLayout {
  std::vector<std::size_t> wm_voxels;
  std::vector<std::size_t> gm_voxels;
  std::vector<std::size_t> csf_voxels;
  std::size_t total_voxels = 0;

  /// Throws DataError on unsorted, duplicate or out-of-range indices.
  void validate() const;

  [[nodiscard]] static TissueLayout all_white_matter(std::size_t voxels);
  /// White matter wherever `mask` is positive.
  [[nodiscard]] static TissueLayout white_matter_where(const Eigen::VectorXd& mask);
  /// Each probability map thresholded at `threshold` independently (>=).
  /// Empty maps contribute no voxels.
  [[nodiscard]] static TissueLayout from_probability_maps(const Eigen::VectorXd& wm, const Eigen::VectorXd& gm,
                                                          const Eigen::VectorXd& csf, double threshold = 0.5);
};

/// Unknowns (S1, S2, S3): fiber coefficients per white-matter voxel and one
/// isotropic coefficient per gray-matter / CSF voxel.
struct FodField {
  Eigen::MatrixXd s1;  // fiber directions x N1
  Eigen::VectorXd s2;  // N2
  Eigen::VectorXd s3;  // N3
  std::shared_ptr<const TissueLayout> layout;

  [[nodiscard]] static FodField zeros(std::size_t fiber_count, std::shared_ptr<const TissueLayout> layout);

  [[nodiscard]] std::size_t fiber_count() const { return static_cast<std::size_t>(s1.rows()); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(s1.size() + s2.size() + s3.size()); }
  [[nodiscard]] double dot(const FodField& o) const { return (s1.cwiseProduct(o.s1)).sum() + s2.dot(o.s2) + s3.dot(o.s3); }
  [[nodiscard]] double squared_norm() const { return s1.squaredNorm() + s2.squaredNorm() + s3.squaredNorm(); }
  [[nodiscard]] double norm() const { return std::sqrt(squared_norm()); }
  [[nodiscard]] bool all_finite() const { return s1.allFinite() && s2.allFinite() && s3.allFinite(); }
  [[nodiscard]] double min_coeff() const;

  /// this += a * x
  void axpy(double a, const FodField& x);
  FodField& operator*=(double a);

  [[nodiscard]] Eigen::VectorXd flatten() const;
  void assign_flat(const Eigen::VectorXd& v);
};

[[nodiscard]] FodField operator-(const FodField& a, const FodField& b);

/// X = Z(S): atoms x voxels with fiber rows 0..n-1, gray matter in row n and
/// CSF in row n + 1. Throws DataError when CSF voxels exist but `atom_count`
/// has no CSF row.
[[nodiscard]] Eigen::MatrixXd expand(const FodField& field, std::size_t atom_count);

/// Adjoint of expand: gathers the entries of X that expand writes.
[[nodiscard]] FodField restrict_field(const Eigen::MatrixXd& x, std::size_t fiber_count,
                                      std::shared_ptr<const TissueLayout> layout);

}  // namespace fodkq
