#include "fodkq/kq_operator.hpp"

#include "fodkq/fft.hpp"
#include "fodkq/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace fodkq {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

KqOperator::KqOperator(const ResponseDictionary& dict, std::shared_ptr<const TissueLayout> layout,
                       const CalibrationData& calib, SamplingMask masks, VolumeShape shape)
    : fiber_count_(dict.fiber_count()),
      gradients_(static_cast<int>(dict.q_count())),
      coils_(calib.coils()),
      shape_(shape),
      masks_(std::move(masks)),
      layout_(std::move(layout)) {
  const auto n_vox = shape_.voxels();
  layout_->validate();
  if (layout_->total_voxels != n_vox) throw DataError("tissue layout does not match the volume");
  if (masks_.gradients != gradients_) throw DataError("mask gradient count does not match the dictionary");
  if (masks_.rows != shape_.nx || masks_.cols != shape_.ny || masks_.slices != shape_.nz) {
    throw DataError("mask grid does not match the volume");
  }
  calib.validate(n_vox, gradients_);
  if (!layout_->gm_voxels.empty() && dict.atom_count() < fiber_count_ + 1) throw DataError("dictionary has no gray matter atom");
  if (!layout_->csf_voxels.empty() && !dict.has_csf()) throw DataError("dictionary has no CSF atom");

  const auto n = static_cast<Eigen::Index>(fiber_count_);
  phi_fiber_ = dict.matrix.leftCols(n);
  if (dict.atom_count() > fiber_count_) phi_gm_ = dict.matrix.col(n);
  if (dict.has_csf()) phi_csf_ = dict.matrix.col(n + 1);

  weights_.resize(static_cast<Eigen::Index>(gradients_) * coils_, static_cast<Eigen::Index>(n_vox));
  for (int q = 0; q < gradients_; ++q) {
    for (int c = 0; c < coils_; ++c) {
      const auto row = static_cast<Eigen::Index>(q) * coils_ + c;
      weights_.row(row) = calib.sensitivities.maps.row(c).cwiseProduct(calib.s0.transpose().cast<Complex>());
      if (calib.has_phase()) weights_.row(row) = weights_.row(row).cwiseProduct(calib.phase_maps.row(row));
    }
  }

  sample_index_.resize(static_cast<std::size_t>(gradients_));
  for (int q = 0; q < gradients_; ++q) {
    auto& idx = sample_index_[static_cast<std::size_t>(q)];
    for (int s = 0; s < shape_.nz; ++s) {
      for (auto i : masks_.indices(q, s)) idx.push_back(static_cast<std::size_t>(s) * shape_.slice_size() + i);
    }
  }
}

void KqOperator::image_rows(const FodField& field, Eigen::MatrixXd& rows) const {
  const auto& l = *layout_;
  rows.setZero(gradients_, static_cast<Eigen::Index>(shape_.voxels()));
  if (!l.wm_voxels.empty()) {
    const Eigen::MatrixXd wm = phi_fiber_ * field.s1;
    for (std::size_t k = 0; k < l.wm_voxels.size(); ++k) {
      rows.col(static_cast<Eigen::Index>(l.wm_voxels[k])) += wm.col(static_cast<Eigen::Index>(k));
    }
  }
  for (std::size_t k = 0; k < l.gm_voxels.size(); ++k) {
    rows.col(static_cast<Eigen::Index>(l.gm_voxels[k])) += phi_gm_ * field.s2(static_cast<Eigen::Index>(k));
  }
  for (std::size_t k = 0; k < l.csf_voxels.size(); ++k) {
    rows.col(static_cast<Eigen::Index>(l.csf_voxels[k])) += phi_csf_ * field.s3(static_cast<Eigen::Index>(k));
  }
}

KqData KqOperator::apply(const FodField& field) const {
  if (field.fiber_count() != fiber_count_ || field.s1.cols() != static_cast<Eigen::Index>(layout_->wm_voxels.size()) ||
      field.s2.size() != static_cast<Eigen::Index>(layout_->gm_voxels.size()) ||
      field.s3.size() != static_cast<Eigen::Index>(layout_->csf_voxels.size())) {
    throw DataError("FOD field shape does not match the operator");
  }
  Eigen::MatrixXd rows;
  image_rows(field, rows);
  KqData out;
  out.gradients = gradients_;
  out.coils = coils_;
  out.blocks.resize(static_cast<std::size_t>(gradients_) * coils_);
  const auto n_vox = static_cast<Eigen::Index>(shape_.voxels());
  parallel_for(static_cast<std::size_t>(gradients_), threads_, [&](std::size_t qi) {
    const auto q = static_cast<int>(qi);
    const auto& idx = sample_index_[qi];
    std::vector<Complex> buf(static_cast<std::size_t>(n_vox));
    for (int c = 0; c < coils_; ++c) {
      const auto w = weights_.row(static_cast<Eigen::Index>(q) * coils_ + c);
      for (Eigen::Index v = 0; v < n_vox; ++v) buf[static_cast<std::size_t>(v)] = rows(q, v) * w(v);
      fft2_slices(buf, shape_.nx, shape_.ny, shape_.nz, false);
      Eigen::VectorXcd block(static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) block(static_cast<Eigen::Index>(k)) = buf[idx[k]];
      out.block(q, c) = std::move(block);
    }
  });
  return out;
}

FodField KqOperator::apply_adjoint(const KqData& data) const {
  if (data.gradients != gradients_ || data.coils != coils_) throw DataError("k-space data shape does not match the operator");
  for (int q = 0; q < gradients_; ++q) {
    for (int c = 0; c < coils_; ++c) {
      if (static_cast<std::size_t>(data.block(q, c).size()) != sample_index_[static_cast<std::size_t>(q)].size()) {
        throw DataError("k-space block size does not match the mask");
      }
    }
  }
  const auto n_vox = static_cast<Eigen::Index>(shape_.voxels());
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(gradients_, n_vox);
  parallel_for(static_cast<std::size_t>(gradients_), threads_, [&](std::size_t qi) {
    const auto q = static_cast<int>(qi);
    const auto& idx = sample_index_[qi];
    std::vector<Complex> buf(static_cast<std::size_t>(n_vox));
    for (int c = 0; c < coils_; ++c) {
      const auto& block = data.block(q, c);
      std::fill(buf.begin(), buf.end(), Complex{});
      for (std::size_t k = 0; k < idx.size(); ++k) buf[idx[k]] = block(static_cast<Eigen::Index>(k));
      fft2_slices(buf, shape_.nx, shape_.ny, shape_.nz, true);
      const auto w = weights_.row(static_cast<Eigen::Index>(q) * coils_ + c);
      for (Eigen::Index v = 0; v < n_vox; ++v) {
        rows(q, v) += (std::conj(w(v)) * buf[static_cast<std::size_t>(v)]).real();
      }
    }
  });

  const auto& l = *layout_;
  FodField out = zero_field();
  if (!l.wm_voxels.empty()) {
    Eigen::MatrixXd wm(gradients_, static_cast<Eigen::Index>(l.wm_voxels.size()));
    for (std::size_t k = 0; k < l.wm_voxels.size(); ++k) {
      wm.col(static_cast<Eigen::Index>(k)) = rows.col(static_cast<Eigen::Index>(l.wm_voxels[k]));
    }
    out.s1.noalias() = phi_fiber_.transpose() * wm;
  }
  for (std::size_t k = 0; k < l.gm_voxels.size(); ++k) {
    out.s2(static_cast<Eigen::Index>(k)) = phi_gm_.dot(rows.col(static_cast<Eigen::Index>(l.gm_voxels[k])));
  }
  for (std::size_t k = 0; k < l.csf_voxels.size(); ++k) {
    out.s3(static_cast<Eigen::Index>(k)) = phi_csf_.dot(rows.col(static_cast<Eigen::Index>(l.csf_voxels[k])));
  }
  return out;
}

SpectralNormResult spectral_norm(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& normal_op,
                                 Eigen::Index dimension, double tol, int max_iter, std::uint64_t seed) {
  if (dimension <= 0) throw std::invalid_argument("spectral_norm: empty domain");
  auto rng = substream(seed, {static_cast<std::uint64_t>(dimension)}, StreamTag::PowerIteration);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x(dimension);
  for (Eigen::Index i = 0; i < dimension; ++i) x(i) = gauss(rng);
  x.normalize();

  SpectralNormResult res;
  Eigen::VectorXd y(dimension);
  double lambda = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    normal_op(x, y);
    const double next = x.dot(y);
    res.iterations = it;
    if (!std::isfinite(next)) throw NumericalError("spectral_norm: non-finite Rayleigh quotient");
    const double ny = y.norm();
    if (ny == 0.0) {
      lambda = 0.0;
      res.converged = true;
      break;
    }
    const bool done = it > 1 && std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    x = y / ny;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.norm = std::sqrt(std::max(lambda, 0.0));
  return res;
}

SpectralNormResult spectral_norm(const KqOperator& op, double tol, int max_iter, std::uint64_t seed) {
  FodField work = op.zero_field();
  const auto dim = static_cast<Eigen::Index>(work.size());
  return spectral_norm(
      [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        work.assign_flat(in);
        out = op.apply_adjoint(op.apply(work)).flatten();
      },
      dim, tol, max_iter, seed);
}

}  // namespace fodkq
