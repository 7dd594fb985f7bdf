#include "fodkq/calibration.hpp"

#include "fodkq/fft.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fodkq {

SensitivityMap synthetic_coil_sensitivities(const VolumeShape& shape, int coils) {
  if (coils < 1) throw std::invalid_argument("coil count must be positive");
  SensitivityMap s{Eigen::MatrixXcd::Ones(coils, static_cast<Eigen::Index>(shape.voxels()))};
  if (coils == 1) return s;
  const double cx = 0.5 * (shape.nx - 1);
  const double cy = 0.5 * (shape.ny - 1);
  const double ring = 0.75 * std::max(shape.nx, shape.ny);
  const double width = 0.8 * std::max(shape.nx, shape.ny);
  for (int c = 0; c < coils; ++c) {
    const double a = 2.0 * std::numbers::pi * c / coils;
    const double px = cx + ring * std::cos(a);
    const double py = cy + ring * std::sin(a);
    const Complex rot = std::polar(1.0, 0.7 * c);
    for (std::size_t v = 0; v < shape.voxels(); ++v) {
      const auto [x, y, z] = shape.coords(v);
      const double d2 = (x - px) * (x - px) + (y - py) * (y - py);
      s.maps(c, static_cast<Eigen::Index>(v)) = rot * std::exp(-d2 / (2.0 * width * width));
    }
  }
  const Eigen::RowVectorXd rss = s.maps.cwiseAbs2().colwise().sum().cwiseSqrt();
  for (Eigen::Index v = 0; v < s.maps.cols(); ++v) s.maps.col(v) /= rss(v);
  return s;
}

void CalibrationData::validate(std::size_t voxels, int gradients) const {
  if (static_cast<std::size_t>(s0.size()) != voxels) throw DataError("s0 image size does not match the volume");
  if ((s0.array() < 0.0).any()) throw DataError("s0 image must be nonnegative");
  if (sensitivities.coils() < 1 || static_cast<std::size_t>(sensitivities.maps.cols()) != voxels) {
    throw DataError("sensitivity maps do not match the volume");
  }
  if (has_phase()) {
    if (phase_maps.rows() != static_cast<Eigen::Index>(gradients) * coils() ||
        static_cast<std::size_t>(phase_maps.cols()) != voxels) {
      throw DataError("phase maps do not match gradients x coils x voxels");
    }
    if (((phase_maps.array().abs() - 1.0).abs() > 1e-9).any()) throw DataError("phase maps must have unit modulus");
  }
}

Eigen::MatrixXcd estimate_phase(const Eigen::MatrixXcd& kspace, const VolumeShape& shape, double central_fraction) {
  if (static_cast<std::size_t>(kspace.cols()) != shape.voxels()) {
    throw DataError("k-space volume size does not match the grid");
  }
  std::vector<std::uint8_t> keep(shape.slice_size());
  for (int r = 0; r < shape.nx; ++r) {
    for (int c = 0; c < shape.ny; ++c) {
      keep[static_cast<std::size_t>(r) * shape.ny + c] =
          in_central_zone(r, shape.nx, central_fraction) && in_central_zone(c, shape.ny, central_fraction);
    }
  }
  Eigen::MatrixXcd phase(kspace.rows(), kspace.cols());
  std::vector<Complex> buf(shape.voxels());
  for (Eigen::Index row = 0; row < kspace.rows(); ++row) {
    for (std::size_t v = 0; v < buf.size(); ++v) {
      buf[v] = keep[v % shape.slice_size()] ? kspace(row, static_cast<Eigen::Index>(v)) : Complex{};
    }
    fft2_slices(buf, shape.nx, shape.ny, shape.nz, true);
    for (std::size_t v = 0; v < buf.size(); ++v) {
      const double m = std::abs(buf[v]);
      phase(row, static_cast<Eigen::Index>(v)) = m < 1e-12 ? Complex{1.0, 0.0} : buf[v] / m;
    }
  }
  return phase;
}

SensitivityMap estimate_sensitivities(const Eigen::MatrixXcd& coil_images) {
  if (coil_images.rows() < 1) throw std::invalid_argument("need at least one coil image");
  SensitivityMap s{Eigen::MatrixXcd::Zero(coil_images.rows(), coil_images.cols())};
  for (Eigen::Index v = 0; v < coil_images.cols(); ++v) {
    const double rss = std::sqrt(coil_images.col(v).cwiseAbs2().sum());
    if (rss > 0.0) s.maps.col(v) = coil_images.col(v) / rss;
  }
  return s;
}

}  // namespace fodkq
