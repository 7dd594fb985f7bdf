#pragma once

#include "fodkq/sampling.hpp"
#include "fodkq/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace fodkq {

/// Packed under-sampled k-space: one block per (gradient, coil), block
/// index q * coils + c. Within a block, samples run slice by slice in
/// ascending in-slice index order of the mask.
struct KqData {
  int gradients = 0;
  int coils = 0;
  std::vector<Eigen::VectorXcd> blocks;

  [[nodiscard]] static KqData zeros(const SamplingMask& masks, int coils);

  [[nodiscard]] Eigen::VectorXcd& block(int q, int c) { return blocks[static_cast<std::size_t>(q) * coils + c]; }
  [[nodiscard]] const Eigen::VectorXcd& block(int q, int c) const {
    return blocks[static_cast<std::size_t>(q) * coils + c];
  }
  [[nodiscard]] std::size_t sample_count() const;

  /// Real part of the complex inner product sum conj(a) * b.
  [[nodiscard]] double dot(const KqData& other) const;
  [[nodiscard]] double squared_norm() const;
  KqData& operator+=(const KqData& o);
  KqData& operator-=(const KqData& o);
  KqData& operator*=(double a);
  /// this += a * x
  void axpy(double a, const KqData& x);
};

[[nodiscard]] KqData operator-(KqData a, const KqData& b);

struct KqMeasurements {
  KqData data;
  SamplingMask masks;
  double snr = 0.0;
  double noise_sigma = 0.0;
};

/// Gather the selected points of a full k-space volume (laid out like the
/// voxel grid) for gradient q.
[[nodiscard]] Eigen::VectorXcd pack_kspace(const Eigen::VectorXcd& full, const SamplingMask& masks, int q);
/// Zero-filled full k-space volume from a packed block.
[[nodiscard]] Eigen::VectorXcd unpack_kspace(const Eigen::VectorXcd& packed, const SamplingMask& masks, int q);

}  // namespace fodkq
