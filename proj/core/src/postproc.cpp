#include "fodkq/postproc.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace fodkq {

PeakSet extract_peaks(const Eigen::Ref<const Eigen::VectorXd>& s1, const DirectionSet& dirs,
                      const AngularNeighborhood& nbh, const PeakOptions& opts) {
  const auto n = static_cast<std::size_t>(s1.size());
  if (n != dirs.size() || n != nbh.size()) throw std::invalid_argument("extract_peaks: size mismatch");
  PeakSet cand;
  for (std::size_t d = 0; d < n; ++d) {
    const double v = s1[static_cast<Eigen::Index>(d)];
    if (!(v > 0.0)) continue;
    bool is_max = true;
    for (auto e : nbh[d]) {
      if (e == d) continue;
      const double u = s1[static_cast<Eigen::Index>(e)];
      if (u > v || (u == v && e < d)) {
        is_max = false;
        break;
      }
    }
    if (!is_max) continue;
    double amp = v;
    if (opts.aggregate_cone) {
      amp = 0.0;
      for (auto e : nbh[d]) amp += s1[static_cast<Eigen::Index>(e)];
    }
    cand.push_back({dirs[d], amp, d});
  }
  // the global maximum is always a candidate, so this is 0.2 max(s1) for raw amplitudes
  double top = 0.0;
  for (const auto& p : cand) top = std::max(top, p.amplitude);
  std::erase_if(cand, [&](const Peak& p) { return p.amplitude < opts.relative_threshold * top; });
  std::stable_sort(cand.begin(), cand.end(), [](const Peak& a, const Peak& b) { return a.amplitude > b.amplitude; });
  if (cand.size() > opts.max_peaks) cand.resize(opts.max_peaks);
  return cand;
}

PeakField extract_peak_field(const FodField& field, const VolumeShape& shape, const DirectionSet& dirs,
                             const AngularNeighborhood& nbh, const PeakOptions& opts) {
  if (!field.layout) throw std::invalid_argument("field has no layout");
  const auto& wm = field.layout->wm_voxels;
  if (static_cast<std::size_t>(field.s1.cols()) != wm.size()) throw DataError("S1 does not match the layout");
  PeakField out{shape, std::vector<PeakSet>(shape.voxels())};
  for (std::size_t k = 0; k < wm.size(); ++k) {
    if (wm[k] >= out.voxels.size()) throw DataError("layout exceeds the volume");
    out.voxels[wm[k]] = extract_peaks(field.s1.col(static_cast<Eigen::Index>(k)), dirs, nbh, opts);
  }
  return out;
}

void write_peaks(std::ostream& os, const PeakField& peaks) {
  const auto old = os.precision(17);
  for (std::size_t v = 0; v < peaks.voxels.size(); ++v) {
    const auto& ps = peaks.voxels[v];
    if (ps.empty()) continue;
    const auto [x, y, z] = peaks.shape.coords(v);
    os << x << ' ' << y << ' ' << z << ' ' << ps.size();
    for (const auto& p : ps) {
      os << ' ' << p.direction.x() << ' ' << p.direction.y() << ' ' << p.direction.z() << ' ' << p.amplitude;
    }
    os << '\n';
  }
  os.precision(old);
}

PeakField read_peaks(std::istream& is, const VolumeShape& shape) {
  PeakField out{shape, std::vector<PeakSet>(shape.voxels())};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    int x = 0, y = 0, z = 0;
    std::size_t n = 0;
    if (!(ls >> x >> y >> z >> n)) throw DataError("peaks: malformed line " + std::to_string(lineno));
    if (x < 0 || y < 0 || z < 0 || x >= shape.nx || y >= shape.ny || z >= shape.nz) {
      throw DataError("peaks: voxel outside grid on line " + std::to_string(lineno));
    }
    PeakSet ps;
    for (std::size_t i = 0; i < n; ++i) {
      Peak p;
      if (!(ls >> p.direction.x() >> p.direction.y() >> p.direction.z() >> p.amplitude)) {
        throw DataError("peaks: truncated line " + std::to_string(lineno));
      }
      ps.push_back(p);
    }
    out.voxels[shape.index(x, y, z)] = std::move(ps);
  }
  return out;
}

namespace {

bool greedy_success(const std::vector<Vec3>& truth, const std::vector<Vec3>& est, double tol) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < est.size(); ++j) pairs.emplace_back(angle_between(truth[i], est[j]), i, j);
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> used_t(truth.size()), used_e(est.size());
  for (const auto& [a, i, j] : pairs) {
    if (used_t[i] || used_e[j]) continue;
    if (a > tol) return false;
    used_t[i] = used_e[j] = true;
  }
  return true;
}

bool exhaustive_success(const std::vector<Vec3>& truth, const std::vector<Vec3>& est, double tol) {
  std::vector<std::size_t> perm(est.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (std::size_t i = 0; i < truth.size() && ok; ++i) ok = angle_between(truth[i], est[perm[i]]) <= tol;
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

}  // namespace

bool voxel_success(const std::vector<Vec3>& truth, const std::vector<Vec3>& est, double tol, Matching matching) {
  if (truth.size() != est.size()) return false;
  if (truth.empty()) return true;
  return matching == Matching::Greedy ? greedy_success(truth, est, tol) : exhaustive_success(truth, est, tol);
}

EvaluationReport evaluate(const PeakField& est, const GroundTruth& truth, double tolerance_deg, Matching matching) {
  if (!(est.shape == truth.shape) || est.voxels.size() != truth.fibers.size()) {
    throw DataError("evaluate: estimate and ground truth grids differ");
  }
  EvaluationReport rep;
  std::size_t successes = 0;
  for (std::size_t v = 0; v < truth.fibers.size(); ++v) {
    if (truth.fibers[v].empty()) continue;
    std::vector<Vec3> t, e;
    for (const auto& f : truth.fibers[v]) t.push_back(f.direction);
    for (const auto& p : est.voxels[v]) e.push_back(p.direction);
    const bool ok = voxel_success(t, e, tolerance_deg, matching);
    successes += ok ? 1 : 0;
    rep.per_voxel_detail.push_back({v, t.size(), e.size(), ok});
    for (const auto& td : t) {
      double best = 90.0;
      for (const auto& ed : e) best = std::min(best, angle_between(td, ed));
      rep.angular_errors.push_back(best);
    }
  }
  if (!rep.per_voxel_detail.empty()) {
    rep.success_rate = static_cast<double>(successes) / static_cast<double>(rep.per_voxel_detail.size());
  }
  if (!rep.angular_errors.empty()) {
    rep.mean_angular_error = std::accumulate(rep.angular_errors.begin(), rep.angular_errors.end(), 0.0) /
                             static_cast<double>(rep.angular_errors.size());
  }
  return rep;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::json j;
  j["success_rate"] = report.success_rate;
  j["mean_angular_error"] = report.mean_angular_error;
  j["angular_errors"] = report.angular_errors;
  auto& det = j["per_voxel_detail"] = nlohmann::json::array();
  for (const auto& d : report.per_voxel_detail) {
    det.push_back({{"voxel", d.voxel}, {"n_true", d.n_true}, {"n_est", d.n_est}, {"success", d.success}});
  }
  return j.dump(2);
}

}  // namespace fodkq
