#pragma once

#include "fodkq/types.hpp"

#include <span>

namespace fodkq {

/// In-place unitary 2D DFT of `slices` contiguous row-major rows x cols
/// planes. Forward uses exp(-2 pi i k x / n); inverse is its adjoint.
/// Thread-safe.
void fft2_slices(std::span<Complex> data, int rows, int cols, int slices, bool inverse);

inline void fft2(std::span<Complex> data, int rows, int cols, bool inverse) {
  fft2_slices(data, rows, cols, 1, inverse);
}

}  // namespace fodkq
