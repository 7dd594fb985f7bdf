#pragma once

#include <fodkq/calibration.hpp>
#include <fodkq/dictionary.hpp>
#include <fodkq/geometry.hpp>
#include <fodkq/kq_operator.hpp>
#include <fodkq/layout.hpp>
#include <fodkq/sampling.hpp>

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <vector>

namespace fixture {

inline std::vector<fodkq::Vec3> random_unit_vectors(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<fodkq::Vec3> out;
  while (out.size() < n) {
    fodkq::Vec3 v(g(rng), g(rng), g(rng));
    if (v.norm() > 1e-3) out.push_back(v.normalized());
  }
  return out;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

/// Small random operator instance. Masks are drawn by the library's
/// generator, calibration terms by `rng`.
struct Instance {
  fodkq::VolumeShape shape;
  fodkq::ResponseDictionary dict;
  std::shared_ptr<const fodkq::TissueLayout> layout;
  fodkq::CalibrationData calib;
  fodkq::SamplingMask masks;

  [[nodiscard]] fodkq::KqOperator op() const { return {dict, layout, calib, masks, shape}; }

  [[nodiscard]] fodkq::FodField random_field(std::mt19937_64& rng) const {
    auto f = fodkq::FodField::zeros(dict.fiber_count(), layout);
    f.assign_flat(random_vector(static_cast<Eigen::Index>(f.size()), rng));
    return f;
  }

  [[nodiscard]] fodkq::KqData random_data(std::mt19937_64& rng) const {
    auto d = fodkq::KqData::zeros(masks, calib.coils());
    std::normal_distribution<double> g;
    for (auto& b : d.blocks)
      for (auto& z : b) z = {g(rng), g(rng)};
    return d;
  }
};

struct InstanceOptions {
  int nx = 4, ny = 4, nz = 2;
  int q_points = 4;
  int fibers = 5;
  int coils = 1;
  bool phase = false;
  bool tissues = false;  // GM and CSF atoms with overlapping layouts
  double acceleration = 1.0;
};

inline Instance make_instance(const InstanceOptions& o, std::mt19937_64& rng) {
  Instance in;
  in.shape = {o.nx, o.ny, o.nz};
  const auto nvox = in.shape.voxels();
  std::uniform_real_distribution<double> u(0.0, 1.0);

  const auto qdirs = fodkq::DirectionSet(random_unit_vectors(static_cast<std::size_t>(o.q_points), rng));
  const auto fdirs = fodkq::DirectionSet(random_unit_vectors(static_cast<std::size_t>(o.fibers), rng));
  const auto scheme = fodkq::QScheme::single_shell(2000.0, qdirs);
  std::vector<double> iso{fodkq::kGrayMatterDiffusivity};
  if (o.tissues) iso.push_back(fodkq::kCsfDiffusivity);
  in.dict = fodkq::build_dictionary(scheme, fdirs, fodkq::TensorParams{}, iso);

  if (o.tissues) {
    Eigen::VectorXd wm(static_cast<Eigen::Index>(nvox)), gm(wm.size()), csf(wm.size());
    for (Eigen::Index v = 0; v < wm.size(); ++v) {
      wm(v) = u(rng);
      gm(v) = u(rng);
      csf(v) = u(rng);
    }
    in.layout = std::make_shared<fodkq::TissueLayout>(fodkq::TissueLayout::from_probability_maps(wm, gm, csf));
  } else {
    in.layout = std::make_shared<fodkq::TissueLayout>(fodkq::TissueLayout::all_white_matter(nvox));
  }

  in.calib.s0 = Eigen::VectorXd(static_cast<Eigen::Index>(nvox));
  for (auto& s : in.calib.s0) s = 0.5 + 2.0 * u(rng);
  in.calib.sensitivities.maps = Eigen::MatrixXcd(o.coils, static_cast<Eigen::Index>(nvox));
  for (auto& z : in.calib.sensitivities.maps.reshaped()) z = std::polar(0.2 + u(rng), 6.283185307179586 * u(rng));
  if (o.phase) {
    const auto rows = static_cast<Eigen::Index>(in.dict.q_count()) * o.coils;
    in.calib.phase_maps = Eigen::MatrixXcd(rows, static_cast<Eigen::Index>(nvox));
    for (auto& z : in.calib.phase_maps.reshaped()) z = std::polar(1.0, 6.283185307179586 * u(rng));
  }
  const auto gradients = static_cast<int>(in.dict.q_count());
  in.masks = o.acceleration <= 1.0
                 ? fodkq::full_masks(o.nx, o.ny, o.nz, gradients)
                 : fodkq::generate_masks(o.nx, o.ny, o.nz, gradients, o.acceleration, 0.25, rng());
  return in;
}

/// Concatenated packed samples.
inline Eigen::VectorXcd stack(const fodkq::KqData& d) {
  Eigen::Index n = 0;
  for (const auto& b : d.blocks) n += b.size();
  Eigen::VectorXcd out(n);
  Eigen::Index o = 0;
  for (const auto& b : d.blocks) {
    out.segment(o, b.size()) = b;
    o += b.size();
  }
  return out;
}

}  // namespace fixture
