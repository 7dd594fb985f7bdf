#pragma once

// Independent reference implementations. Nothing here calls into the
// library's operator, projection or solver code.

#include <fodkq/calibration.hpp>
#include <fodkq/dictionary.hpp>
#include <fodkq/layout.hpp>
#include <fodkq/sampling.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Unitary 1D DFT matrix, forward sign.
inline MatrixXcd dft_matrix(int n) {
  MatrixXcd f(n, n);
  for (int k = 0; k < n; ++k)
    for (int x = 0; x < n; ++x)
      f(k, x) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * std::numbers::pi * k * x / n);
  return f;
}

/// Dense complex matrix of the measurement operator: columns follow
/// FodField::flatten (s1 column-major, then s2, then s3), rows follow the
/// packed (gradient, coil, slice, in-slice index) sample order. Built from
/// explicit DFT sums.
inline MatrixXcd dense_operator(const fodkq::ResponseDictionary& dict, const fodkq::TissueLayout& layout,
                                const fodkq::CalibrationData& calib, const fodkq::SamplingMask& masks,
                                const fodkq::VolumeShape& shape) {
  const int nq = static_cast<int>(dict.q_count());
  const int coils = calib.coils();
  const auto n = static_cast<Eigen::Index>(dict.fiber_count());
  const auto n1 = static_cast<Eigen::Index>(layout.wm_voxels.size());
  const auto n2 = static_cast<Eigen::Index>(layout.gm_voxels.size());
  const auto n3 = static_cast<Eigen::Index>(layout.csf_voxels.size());
  const Eigen::Index cols = n * n1 + n2 + n3;
  const auto nvox = static_cast<Eigen::Index>(shape.voxels());

  // unknown -> (voxel, atom)
  std::vector<std::pair<Eigen::Index, Eigen::Index>> unk;
  for (Eigen::Index j = 0; j < n1; ++j)
    for (Eigen::Index d = 0; d < n; ++d) unk.emplace_back(static_cast<Eigen::Index>(layout.wm_voxels[j]), d);
  for (auto v : layout.gm_voxels) unk.emplace_back(static_cast<Eigen::Index>(v), n);
  for (auto v : layout.csf_voxels) unk.emplace_back(static_cast<Eigen::Index>(v), n + 1);

  const MatrixXcd fr = dft_matrix(shape.nx);
  const MatrixXcd fc = dft_matrix(shape.ny);

  std::vector<Eigen::RowVectorXcd> rows;
  for (int q = 0; q < nq; ++q)
    for (int c = 0; c < coils; ++c)
      for (int z = 0; z < shape.nz; ++z)
        for (int kr = 0; kr < shape.nx; ++kr)
          for (int kc = 0; kc < shape.ny; ++kc) {
            if (!masks.at(q, z, kr, kc)) continue;
            // k-space value = sum_v F[kr,x] F[kc,y] w_v img_v
            Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(cols);
            for (Eigen::Index u = 0; u < cols; ++u) {
              const auto [v, atom] = unk[static_cast<std::size_t>(u)];
              const auto xyz = shape.coords(static_cast<std::size_t>(v));
              if (xyz[2] != z) continue;
              std::complex<double> w = calib.s0(v) * calib.sensitivities.maps(c, v);
              if (calib.has_phase()) w *= calib.phase_maps(q * coils + c, v);
              row(u) = fr(kr, xyz[0]) * fc(kc, xyz[1]) * w * dict.matrix(q, atom);
            }
            rows.push_back(row);
          }
  MatrixXcd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
  (void)nvox;
  return m;
}

/// Euclidean projection onto {y >= 0, sum w y <= kappa} by enumerating every
/// candidate support (2^n subsets). Exact up to rounding for n <= ~16.
inline VectorXd projection_by_enumeration(const VectorXd& x, const VectorXd& w, double kappa) {
  const int n = static_cast<int>(x.size());
  VectorXd best = VectorXd::Zero(n);
  double best_dist = std::numeric_limits<double>::infinity();
  auto consider = [&](const VectorXd& y) {
    if ((y.array() < 0).any()) return;
    if (w.dot(y) > kappa * (1 + 1e-12) + 1e-14) return;
    const double d = (x - y).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = y;
    }
  };
  consider(x.cwiseMax(0.0));
  consider(VectorXd::Zero(n));
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    double swx = 0, sww = 0;
    for (int i = 0; i < n; ++i)
      if (s & (1u << i)) {
        swx += w(i) * x(i);
        sww += w(i) * w(i);
      }
    const double theta = (swx - kappa) / sww;
    if (theta < 0) continue;
    VectorXd y = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
      if (s & (1u << i)) y(i) = x(i) - theta * w(i);
    consider(y);
  }
  return best;
}

/// min ||M x - b||^2 over x >= 0 by enumerating supports (small n only).
inline VectorXd nnls_by_enumeration(const MatrixXd& m, const VectorXd& b) {
  const int n = static_cast<int>(m.cols());
  VectorXd best = VectorXd::Zero(n);
  double best_obj = b.squaredNorm();
  for (std::uint32_t s = 1; s < (1u << n); ++s) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (s & (1u << i)) idx.push_back(i);
    MatrixXd sub(m.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
    const VectorXd xs = sub.colPivHouseholderQr().solve(b);
    if ((xs.array() < 0).any()) continue;
    VectorXd x = VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) x(idx[k]) = xs(static_cast<Eigen::Index>(k));
    const double obj = (m * x - b).squaredNorm();
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

/// Real-valued stacking [Re; Im] of a complex operator acting on real inputs.
inline MatrixXd realify(const MatrixXcd& m) {
  MatrixXd r(2 * m.rows(), m.cols());
  r << m.real(), m.imag();
  return r;
}

inline VectorXd realify(const VectorXcd& v) {
  VectorXd r(2 * v.size());
  r << v.real(), v.imag();
  return r;
}

inline double largest_singular_value(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

}  // namespace oracle
