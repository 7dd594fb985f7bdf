#include "fodkq/measurements.hpp"

namespace fodkq {

KqData KqData::zeros(const SamplingMask& masks, int coils) {
  KqData d;
  d.gradients = masks.gradients;
  d.coils = coils;
  d.blocks.resize(static_cast<std::size_t>(masks.gradients) * coils);
  for (int q = 0; q < masks.gradients; ++q) {
    const auto k = static_cast<Eigen::Index>(masks.count(q));
    for (int c = 0; c < coils; ++c) d.block(q, c) = Eigen::VectorXcd::Zero(k);
  }
  return d;
}

std::size_t KqData::sample_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += static_cast<std::size_t>(b.size());
  return n;
}

double KqData::dot(const KqData& other) const {
  double s = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) s += blocks[i].dot(other.blocks[i]).real();
  return s;
}

double KqData::squared_norm() const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.squaredNorm();
  return s;
}

KqData& KqData::operator+=(const KqData& o) {
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += o.blocks[i];
  return *this;
}

KqData& KqData::operator-=(const KqData& o) {
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] -= o.blocks[i];
  return *this;
}

KqData& KqData::operator*=(double a) {
  for (auto& b : blocks) b *= a;
  return *this;
}

void KqData::axpy(double a, const KqData& x) {
  for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i] += a * x.blocks[i];
}

KqData operator-(KqData a, const KqData& b) {
  a -= b;
  return a;
}

Eigen::VectorXcd pack_kspace(const Eigen::VectorXcd& full, const SamplingMask& masks, int q) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(masks.count(q)));
  Eigen::Index k = 0;
  for (int s = 0; s < masks.slices; ++s) {
    const auto off = masks.offset(q, s);
    const auto base = static_cast<std::size_t>(s) * masks.slice_points();
    for (std::size_t i = 0; i < masks.slice_points(); ++i) {
      if (masks.selected[off + i]) out(k++) = full(static_cast<Eigen::Index>(base + i));
    }
  }
  return out;
}

Eigen::VectorXcd unpack_kspace(const Eigen::VectorXcd& packed, const SamplingMask& masks, int q) {
  Eigen::VectorXcd full = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(masks.slice_points() * masks.slices));
  Eigen::Index k = 0;
  for (int s = 0; s < masks.slices; ++s) {
    const auto off = masks.offset(q, s);
    const auto base = static_cast<std::size_t>(s) * masks.slice_points();
    for (std::size_t i = 0; i < masks.slice_points(); ++i) {
      if (masks.selected[off + i]) full(static_cast<Eigen::Index>(base + i)) = packed(k++);
    }
  }
  return full;
}

}  // namespace fodkq
