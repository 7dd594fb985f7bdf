#include "fodkq/dictionary.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <stdexcept>

namespace fodkq {

void TensorParams::validate() const {
  if (!(lambda1 >= lambda2 && lambda2 >= lambda3 && lambda3 > 0.0)) {
    throw std::invalid_argument("tensor diffusivities must satisfy lambda1 >= lambda2 >= lambda3 > 0");
  }
}

Eigen::Matrix3d rotate_tensor(const TensorParams& wm, const Vec3& d) {
  if (std::abs(d.norm() - 1.0) > 1e-9) throw std::invalid_argument("direction not normalized");
  if (wm.lambda2 == wm.lambda3) {
    const Eigen::Matrix3d ddt = d * d.transpose();
    return wm.lambda1 * ddt + wm.lambda2 * (Eigen::Matrix3d::Identity() - ddt);
  }
  const Eigen::Matrix3d r = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), d).toRotationMatrix();
  const Eigen::Vector3d diag(wm.lambda2, wm.lambda3, wm.lambda1);
  return r * diag.asDiagonal() * r.transpose();
}

double fiber_response(const TensorParams& wm, const Vec3& fiber, double b_value, const Vec3& qhat) {
  if (b_value == 0.0) return 1.0;
  if (wm.lambda2 == wm.lambda3) {
    const double c = qhat.dot(fiber);
    return std::exp(-b_value * (wm.lambda2 + (wm.lambda1 - wm.lambda2) * c * c));
  }
  return std::exp(-b_value * qhat.dot(rotate_tensor(wm, fiber) * qhat));
}

ResponseDictionary build_dictionary(const QScheme& q, const DirectionSet& dirs, const TensorParams& wm,
                                    const std::vector<double>& iso) {
  wm.validate();
  if (iso.empty() || iso.size() > 2) {
    throw std::invalid_argument("dictionary needs one (synthetic) or two (gray matter + CSF) isotropic atoms");
  }
  for (double l : iso) {
    if (!(l > 0.0)) throw std::invalid_argument("isotropic diffusivity must be positive");
  }
  if (q.size() == 0 || dirs.empty()) throw std::invalid_argument("dictionary needs q-points and directions");

  ResponseDictionary dict;
  dict.q_scheme = q;
  dict.fiber_dirs = dirs;
  dict.white_matter = wm;
  dict.iso_diffusivities = iso;
  const auto n = dirs.size();
  dict.matrix.resize(static_cast<Eigen::Index>(q.size()), static_cast<Eigen::Index>(n + iso.size()));
  for (std::size_t r = 0; r < q.size(); ++r) {
    const auto& p = q[r];
    for (std::size_t d = 0; d < n; ++d) dict.matrix(r, d) = fiber_response(wm, dirs[d], p.b_value, p.direction);
    for (std::size_t k = 0; k < iso.size(); ++k) dict.matrix(r, n + k) = std::exp(-p.b_value * iso[k]);
  }
  dict.atom_kinds.assign(n, AtomKind::Fiber);
  dict.atom_kinds.push_back(AtomKind::IsoGrayMatter);
  if (iso.size() == 2) dict.atom_kinds.push_back(AtomKind::IsoCsf);
  return dict;
}

}  // namespace fodkq
