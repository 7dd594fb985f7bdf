#include "fodkq/layout.hpp"

#include <algorithm>
#include <cmath>

namespace fodkq {
namespace {

void check_list(const std::vector<std::size_t>& l, std::size_t total, const char* name) {
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] >= total) throw DataError(std::string(name) + " voxel index out of range");
    if (i > 0 && l[i] <= l[i - 1]) throw DataError(std::string(name) + " voxel list must be strictly increasing");
  }
}

std::vector<std::size_t> threshold(const Eigen::VectorXd& p, double t) {
  std::vector<std::size_t> out;
  for (Eigen::Index v = 0; v < p.size(); ++v) {
    if (p(v) >= t) out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

void TissueLayout::validate() const {
  check_list(wm_voxels, total_voxels, "white matter");
  check_list(gm_voxels, total_voxels, "gray matter");
  check_list(csf_voxels, total_voxels, "CSF");
  if (wm_voxels.size() + gm_voxels.size() + csf_voxels.size() == 0) throw DataError("tissue layout is empty");
}

TissueLayout TissueLayout::all_white_matter(std::size_t voxels) {
  TissueLayout l;
  l.total_voxels = voxels;
  l.wm_voxels.resize(voxels);
  for (std::size_t v = 0; v < voxels; ++v) l.wm_voxels[v] = v;
  return l;
}

TissueLayout TissueLayout::white_matter_where(const Eigen::VectorXd& mask) {
  TissueLayout l;
  l.total_voxels = static_cast<std::size_t>(mask.size());
  for (Eigen::Index v = 0; v < mask.size(); ++v) {
    if (mask(v) > 0.0) l.wm_voxels.push_back(static_cast<std::size_t>(v));
  }
  return l;
}

TissueLayout TissueLayout::from_probability_maps(const Eigen::VectorXd& wm, const Eigen::VectorXd& gm,
                                                 const Eigen::VectorXd& csf, double t) {
  TissueLayout l;
  l.total_voxels = static_cast<std::size_t>(std::max({wm.size(), gm.size(), csf.size()}));
  for (const auto* m : {&wm, &gm, &csf}) {
    if (m->size() != 0 && static_cast<std::size_t>(m->size()) != l.total_voxels) {
      throw DataError("tissue probability maps differ in size");
    }
  }
  l.wm_voxels = threshold(wm, t);
  l.gm_voxels = threshold(gm, t);
  l.csf_voxels = threshold(csf, t);
  return l;
}

FodField FodField::zeros(std::size_t fiber_count, std::shared_ptr<const TissueLayout> layout) {
  FodField f;
  f.s1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fiber_count),
                               static_cast<Eigen::Index>(layout->wm_voxels.size()));
  f.s2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout->gm_voxels.size()));
  f.s3 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout->csf_voxels.size()));
  f.layout = std::move(layout);
  return f;
}

double FodField::min_coeff() const {
  double m = std::numeric_limits<double>::infinity();
  if (s1.size()) m = std::min(m, s1.minCoeff());
  if (s2.size()) m = std::min(m, s2.minCoeff());
  if (s3.size()) m = std::min(m, s3.minCoeff());
  return m;
}

void FodField::axpy(double a, const FodField& x) {
  s1 += a * x.s1;
  s2 += a * x.s2;
  s3 += a * x.s3;
}

FodField& FodField::operator*=(double a) {
  s1 *= a;
  s2 *= a;
  s3 *= a;
  return *this;
}

Eigen::VectorXd FodField::flatten() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  v << s1.reshaped(), s2, s3;
  return v;
}

void FodField::assign_flat(const Eigen::VectorXd& v) {
  const auto n1 = s1.size();
  s1.reshaped() = v.head(n1);
  s2 = v.segment(n1, s2.size());
  s3 = v.tail(s3.size());
}

FodField operator-(const FodField& a, const FodField& b) {
  FodField d = a;
  d.axpy(-1.0, b);
  return d;
}

Eigen::MatrixXd expand(const FodField& field, std::size_t atom_count) {
  const auto& l = *field.layout;
  const auto n = field.fiber_count();
  if (atom_count < n + (l.gm_voxels.empty() ? 0 : 1)) throw DataError("dictionary has no gray matter atom");
  if (!l.csf_voxels.empty() && atom_count < n + 2) throw DataError("dictionary has no CSF atom");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(atom_count),
                                            static_cast<Eigen::Index>(l.total_voxels));
  for (std::size_t k = 0; k < l.wm_voxels.size(); ++k) {
    x.col(static_cast<Eigen::Index>(l.wm_voxels[k])).head(static_cast<Eigen::Index>(n)) = field.s1.col(static_cast<Eigen::Index>(k));
  }
  for (std::size_t k = 0; k < l.gm_voxels.size(); ++k) {
    x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l.gm_voxels[k])) = field.s2(static_cast<Eigen::Index>(k));
  }
  for (std::size_t k = 0; k < l.csf_voxels.size(); ++k) {
    x(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(l.csf_voxels[k])) = field.s3(static_cast<Eigen::Index>(k));
  }
  return x;
}

FodField restrict_field(const Eigen::MatrixXd& x, std::size_t fiber_count, std::shared_ptr<const TissueLayout> layout) {
  FodField f = FodField::zeros(fiber_count, layout);
  const auto& l = *layout;
  const auto n = static_cast<Eigen::Index>(fiber_count);
  if (static_cast<std::size_t>(x.cols()) != l.total_voxels) throw DataError("restrict: voxel count mismatch");
  for (std::size_t k = 0; k < l.wm_voxels.size(); ++k) {
    f.s1.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(l.wm_voxels[k])).head(n);
  }
  for (std::size_t k = 0; k < l.gm_voxels.size(); ++k) {
    f.s2(static_cast<Eigen::Index>(k)) = x(n, static_cast<Eigen::Index>(l.gm_voxels[k]));
  }
  for (std::size_t k = 0; k < l.csf_voxels.size(); ++k) {
    f.s3(static_cast<Eigen::Index>(k)) = x(n + 1, static_cast<Eigen::Index>(l.csf_voxels[k]));
  }
  return f;
}

}  // namespace fodkq
