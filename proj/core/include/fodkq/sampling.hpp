#pragma once

#include "fodkq/types.hpp"

#include <cstdint>
#include <vector>

namespace fodkq {

/// Per-gradient, per-slice Cartesian k-space selection.
///
/// k-space is stored in natural DFT order (DC at index 0). The central
/// zone is the block of signed frequencies [-floor(c/2), c - floor(c/2) - 1]
/// with c = ceil(central_fraction * dim) along each axis.
struct SamplingMask {
  int rows = 0;
  int cols = 0;
  int slices = 0;
  int gradients = 0;
  double acceleration = 1.0;
  double central_fraction = 0.125;
  std::uint64_t seed = 0;
  std::vector<std::uint8_t> selected;  // [gradient][slice][row][col]

  [[nodiscard]] std::size_t slice_points() const { return static_cast<std::size_t>(rows) * cols; }
  [[nodiscard]] std::size_t offset(int q, int slice) const {
    return (static_cast<std::size_t>(q) * slices + slice) * slice_points();
  }
  [[nodiscard]] bool at(int q, int slice, int r, int c) const {
    return selected[offset(q, slice) + static_cast<std::size_t>(r) * cols + c] != 0;
  }
  /// Selected points for (q, slice).
  [[nodiscard]] std::size_t count(int q, int slice) const;
  /// Selected points for gradient q over all slices.
  [[nodiscard]] std::size_t count(int q) const;
  /// Linear in-slice indices (r * cols + c) of the selected points, ascending.
  [[nodiscard]] std::vector<std::size_t> indices(int q, int slice) const;
};

/// True when DFT index `i` on an axis of length `dim` falls in the central zone.
[[nodiscard]] bool in_central_zone(int i, int dim, double central_fraction);
/// Side length of the central zone for an axis of length `dim`.
[[nodiscard]] int central_zone_side(int dim, double central_fraction);

/// Gradient 0 is fully sampled; every other (gradient, slice) keeps the
/// central zone plus uniformly drawn points up to ceil(total / acceleration).
/// Throws std::invalid_argument("central zone exceeds sampling budget").
[[nodiscard]] SamplingMask generate_masks(int rows, int cols, int slices, int gradients, double acceleration,
                                          double central_fraction, std::uint64_t seed);

/// Fully sampled masks (acceleration 1).
[[nodiscard]] SamplingMask full_masks(int rows, int cols, int slices, int gradients);

/// |grid| / K_q with K_q counted over all slices.
[[nodiscard]] double undersampling_factor(const SamplingMask& mask, int q);

/// Diffusion-weighted data budget in fully sampled single-gradient volumes.
[[nodiscard]] double image_units(int q_count_nonzero_b, double acceleration);

}  // namespace fodkq
