#include "fodkq/sampling.hpp"

#include "fodkq/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fodkq {

std::size_t SamplingMask::count(int q, int slice) const {
  const auto begin = selected.begin() + static_cast<std::ptrdiff_t>(offset(q, slice));
  return static_cast<std::size_t>(std::count(begin, begin + static_cast<std::ptrdiff_t>(slice_points()), 1));
}

std::size_t SamplingMask::count(int q) const {
  std::size_t k = 0;
  for (int s = 0; s < slices; ++s) k += count(q, s);
  return k;
}

std::vector<std::size_t> SamplingMask::indices(int q, int slice) const {
  std::vector<std::size_t> idx;
  const auto off = offset(q, slice);
  for (std::size_t i = 0; i < slice_points(); ++i) {
    if (selected[off + i] != 0) idx.push_back(i);
  }
  return idx;
}

int central_zone_side(int dim, double central_fraction) {
  const int c = static_cast<int>(std::ceil(central_fraction * dim - 1e-12));
  return std::clamp(c, 1, dim);
}

bool in_central_zone(int i, int dim, double central_fraction) {
  const int c = central_zone_side(dim, central_fraction);
  const int f = i < (dim + 1) / 2 ? i : i - dim;  // signed frequency
  return f >= -(c / 2) && f <= c - c / 2 - 1;
}

SamplingMask full_masks(int rows, int cols, int slices, int gradients) {
  SamplingMask m;
  m.rows = rows;
  m.cols = cols;
  m.slices = slices;
  m.gradients = gradients;
  m.acceleration = 1.0;
  m.central_fraction = 1.0;
  m.selected.assign(static_cast<std::size_t>(gradients) * slices * rows * cols, 1);
  return m;
}

SamplingMask generate_masks(int rows, int cols, int slices, int gradients, double acceleration,
                            double central_fraction, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0 || slices <= 0 || gradients <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  if (!(acceleration >= 1.0)) throw std::invalid_argument("acceleration must be >= 1");
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) {
    throw std::invalid_argument("central fraction must lie in (0, 1]");
  }
  SamplingMask m;
  m.rows = rows;
  m.cols = cols;
  m.slices = slices;
  m.gradients = gradients;
  m.acceleration = acceleration;
  m.central_fraction = central_fraction;
  m.seed = seed;
  const std::size_t total = m.slice_points();
  m.selected.assign(total * slices * gradients, 0);

  const auto budget = static_cast<std::size_t>(std::ceil(static_cast<double>(total) / acceleration - 1e-9));
  std::vector<std::uint8_t> center(total, 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      center[static_cast<std::size_t>(r) * cols + c] =
          in_central_zone(r, rows, central_fraction) && in_central_zone(c, cols, central_fraction) ? 1 : 0;
    }
  }
  const auto n_center = static_cast<std::size_t>(std::count(center.begin(), center.end(), 1));
  if (n_center > budget) throw std::invalid_argument("central zone exceeds sampling budget");

  std::vector<std::size_t> outer;
  for (std::size_t i = 0; i < total; ++i) {
    if (!center[i]) outer.push_back(i);
  }
  std::fill_n(m.selected.begin(), total * slices, std::uint8_t{1});
  for (int q = 1; q < gradients; ++q) {
    for (int s = 0; s < slices; ++s) {
      auto* sel = m.selected.data() + m.offset(q, s);
      std::copy(center.begin(), center.end(), sel);
      auto rng = substream(seed, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(s)}, StreamTag::Mask);
      std::vector<std::size_t> pool = outer;
      // partial Fisher-Yates: first (budget - n_center) entries are the draw
      const std::size_t draws = budget - n_center;
      for (std::size_t i = 0; i < draws; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        sel[pool[i]] = 1;
      }
    }
  }
  return m;
}

double undersampling_factor(const SamplingMask& mask, int q) {
  if (q < 0 || q >= mask.gradients) throw std::out_of_range("gradient index out of range");
  return static_cast<double>(mask.slice_points() * mask.slices) / static_cast<double>(mask.count(q));
}

double image_units(int q_count_nonzero_b, double acceleration) {
  if (q_count_nonzero_b <= 0 || !(acceleration > 0.0)) throw std::invalid_argument("image_units: inputs must be positive");
  return static_cast<double>(q_count_nonzero_b) / acceleration;
}

}  // namespace fodkq
