#pragma once

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace fodkq {

using Vec3 = Eigen::Vector3d;
using Complex = std::complex<double>;

/// Input that is malformed or inconsistent with other inputs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative method produced non-finite values or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Voxel grid. Slices are stacked along z; within a slice the layout is
/// row-major with x as the row index and y as the column index, so the
/// linear voxel index is z * nx * ny + x * ny + y.
struct VolumeShape {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  [[nodiscard]] std::size_t slice_size() const { return static_cast<std::size_t>(nx) * ny; }
  [[nodiscard]] std::size_t voxels() const { return slice_size() * nz; }
  [[nodiscard]] std::size_t index(int x, int y, int z) const {
    return static_cast<std::size_t>(z) * slice_size() + static_cast<std::size_t>(x) * ny + y;
  }
  [[nodiscard]] std::array<int, 3> coords(std::size_t v) const {
    const auto z = static_cast<int>(v / slice_size());
    const auto r = v % slice_size();
    return {static_cast<int>(r / ny), static_cast<int>(r % ny), z};
  }
  [[nodiscard]] bool valid() const { return nx > 0 && ny > 0 && nz > 0; }

  friend bool operator==(const VolumeShape&, const VolumeShape&) = default;
};

}  // namespace fodkq
