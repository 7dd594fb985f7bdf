#pragma once

#include "fodkq/calibration.hpp"
#include "fodkq/dictionary.hpp"
#include "fodkq/layout.hpp"
#include "fodkq/measurements.hpp"
#include "fodkq/sampling.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace fodkq {

/// Measurement operator S -> A(Z(S)). For gradient q and coil c the
/// image row Phi_q Z(S) is weighted voxelwise by s0, U^(c) and H^(q,c),
/// transformed slice by slice with the unitary 2D DFT and masked.
///
/// The adjoint is taken with respect to the real inner product
/// Re<y1, y2>, so it ends with a projection onto real values.
class KqOperator {
 public:
  KqOperator(const ResponseDictionary& dict, std::shared_ptr<const TissueLayout> layout, const CalibrationData& calib,
             SamplingMask masks, VolumeShape shape);

  [[nodiscard]] KqData apply(const FodField& field) const;
  [[nodiscard]] FodField apply_adjoint(const KqData& data) const;

  [[nodiscard]] FodField zero_field() const { return FodField::zeros(fiber_count_, layout_); }
  [[nodiscard]] KqData zero_data() const { return KqData::zeros(masks_, coils_); }

  [[nodiscard]] std::size_t fiber_count() const { return fiber_count_; }
  [[nodiscard]] int coils() const { return coils_; }
  [[nodiscard]] int gradients() const { return gradients_; }
  [[nodiscard]] const VolumeShape& shape() const { return shape_; }
  [[nodiscard]] const SamplingMask& masks() const { return masks_; }
  [[nodiscard]] const std::shared_ptr<const TissueLayout>& layout() const { return layout_; }

  /// Worker threads used over gradients (1 = serial). Results do not
  /// depend on the thread count.
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }

 private:
  void image_rows(const FodField& field, Eigen::MatrixXd& rows) const;

  std::size_t fiber_count_;
  int gradients_;
  int coils_;
  VolumeShape shape_;
  SamplingMask masks_;
  std::shared_ptr<const TissueLayout> layout_;
  Eigen::MatrixXd phi_fiber_;      // gradients x fibers
  Eigen::VectorXd phi_gm_;         // gradients
  Eigen::VectorXd phi_csf_;        // gradients (empty without CSF atom)
  Eigen::MatrixXcd weights_;       // (q * coils + c) x voxels: s0 U^(c) H^(q,c)
  std::vector<std::vector<std::size_t>> sample_index_;  // per q: voxel-grid index of each packed sample
  int threads_ = 1;
};

struct SpectralNormResult {
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Power iteration on a symmetric PSD map (typically A^T A) from a seeded
/// Gaussian start. Returns sqrt of the final Rayleigh quotient.
[[nodiscard]] SpectralNormResult spectral_norm(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& normal_op, Eigen::Index dimension,
    double tol, int max_iter, std::uint64_t seed);

/// Spectral norm of a KqOperator (power iteration on A^T A).
[[nodiscard]] SpectralNormResult spectral_norm(const KqOperator& op, double tol, int max_iter, std::uint64_t seed);

/// Run `fn(i)` for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace fodkq
