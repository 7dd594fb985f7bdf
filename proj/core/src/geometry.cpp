#include "fodkq/geometry.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace fodkq {
namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kMinSeparationRad = 1e-9;

double antipodal_angle_rad(const Vec3& a, const Vec3& b) {
  if (a == b || a == -b) return 0.0;
  // fixed operand order keeps the result exactly symmetric (vectorized cross may fuse)
  if (std::lexicographical_compare(b.data(), b.data() + 3, a.data(), a.data() + 3)) return antipodal_angle_rad(b, a);
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

std::string format17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Vec3 canonicalize(const Vec3& d) {
  bool flip = false;
  if (d.z() != 0.0) {
    flip = d.z() < 0.0;
  } else if (d.y() != 0.0) {
    flip = d.y() < 0.0;
  } else {
    flip = d.x() < 0.0;
  }
  return flip ? Vec3(-d) : d;
}

DirectionSet::DirectionSet(std::vector<Vec3> directions) : dirs_(std::move(directions)) {
  for (auto& d : dirs_) {
    const double n = d.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw std::invalid_argument("direction set contains a zero or non-finite vector");
    }
    // already-unit input (e.g. read back from text) is kept bit-exact
    d = canonicalize(std::abs(n - 1.0) <= 1e-15 ? d : Vec3(d / n));
  }
  for (std::size_t i = 0; i < dirs_.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs_.size(); ++j) {
      if (antipodal_angle_rad(dirs_[i], dirs_[j]) < kMinSeparationRad) {
        throw std::invalid_argument("direction set contains duplicate directions");
      }
    }
  }
}

std::size_t DirectionSet::nearest(const Vec3& d) const {
  std::size_t best = 0;
  double best_dot = -1.0;
  for (std::size_t i = 0; i < dirs_.size(); ++i) {
    const double c = std::abs(dirs_[i].dot(d));
    if (c > best_dot) {
      best_dot = c;
      best = i;
    }
  }
  return best;
}

QScheme::QScheme(std::vector<QPoint> points) : points_(std::move(points)) {
  if (points_.empty() || points_.front().b_value != 0.0) {
    throw std::invalid_argument("q-scheme must start with a b = 0 point");
  }
  double shell = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!(p.b_value > 0.0)) {
      throw std::invalid_argument("q-scheme: only the first point may have b = 0");
    }
    if (shell == 0.0) {
      shell = p.b_value;
    } else if (p.b_value != shell) {
      throw std::invalid_argument("q-scheme must be single-shell");
    }
    if (std::abs(p.direction.norm() - 1.0) > kUnitTolerance) {
      throw std::invalid_argument("q-scheme direction not normalized");
    }
  }
  points_.front().direction = Vec3::Zero();
}

QScheme QScheme::single_shell(double b_value, const DirectionSet& dirs) {
  std::vector<QPoint> pts;
  pts.reserve(dirs.size() + 1);
  pts.push_back({0.0, Vec3::Zero()});
  for (const auto& d : dirs.directions()) pts.push_back({b_value, d});
  return QScheme(std::move(pts));
}

double QScheme::shell_b_value() const { return points_.size() > 1 ? points_[1].b_value : 0.0; }

double antipodal_energy(const std::vector<Vec3>& points) {
  double e = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      e += 1.0 / (points[i] - points[j]).norm() + 1.0 / (points[i] + points[j]).norm();
    }
  }
  return e;
}

DirectionSet generate_directions(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate_directions: n must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3> x(n);
  for (auto& p : x) {
    do {
      p = Vec3(gauss(rng), gauss(rng), gauss(rng));
    } while (p.norm() < 1e-8);
    p.normalize();
  }

  constexpr int kMaxIterations = 2000;
  double step = 0.1;  // largest per-point displacement, radians
  double energy = antipodal_energy(x);
  std::vector<Vec3> grad(n), trial(n);
  for (int it = 0; it < kMaxIterations && n > 1 && step > 1e-12; ++it) {
    for (auto& g : grad) g.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const Vec3 dm = x[i] - x[j];
        const Vec3 dp = x[i] + x[j];
        const double rm = dm.norm();
        const double rp = dp.norm();
        const Vec3 fm = dm / (rm * rm * rm);
        const Vec3 fp = dp / (rp * rp * rp);
        grad[i] -= fm + fp;
        grad[j] += fm - fp;
      }
    }
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] -= grad[i].dot(x[i]) * x[i];  // tangent component
      gmax = std::max(gmax, grad[i].norm());
    }
    if (gmax < 1e-14) break;
    for (std::size_t i = 0; i < n; ++i) trial[i] = (x[i] - (step / gmax) * grad[i]).normalized();
    const double trial_energy = antipodal_energy(trial);
    if (trial_energy < energy) {
      x.swap(trial);
      energy = trial_energy;
      step = std::min(step * 1.2, 0.2);
    } else {
      step *= 0.5;
    }
  }

  // Fix the global rotation so the first point sits on +z.
  const Eigen::Quaterniond rot = Eigen::Quaterniond::FromTwoVectors(x.front(), Vec3::UnitZ());
  for (auto& p : x) p = rot * p;
  x.front() = Vec3::UnitZ();
  for (auto& p : x) {
    for (int k = 0; k < 3; ++k) {
      if (std::abs(p[k]) < 1e-15) p[k] = 0.0;
    }
  }
  return DirectionSet(std::move(x));
}

QScheme subset_q_points(const QScheme& full, std::size_t m) {
  const std::size_t available = full.diffusion_count();
  if (m == 0) throw std::invalid_argument("subset_q_points: m must be positive");
  if (m > available) throw std::invalid_argument("insufficient q-points");

  std::vector<std::size_t> chosen;
  std::vector<double> min_angle(full.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(full.size(), false);

  std::size_t first = 1;
  double best = -1.0;
  for (std::size_t i = 1; i < full.size(); ++i) {
    const double c = std::abs(full[i].direction.z());
    if (c > best) {
      best = c;
      first = i;
    }
  }
  auto take = [&](std::size_t idx) {
    taken[idx] = true;
    chosen.push_back(idx);
    for (std::size_t i = 1; i < full.size(); ++i) {
      min_angle[i] = std::min(min_angle[i], antipodal_angle_rad(full[i].direction, full[idx].direction));
    }
  };
  take(first);
  while (chosen.size() < m) {
    std::size_t pick = 0;
    double pick_angle = -1.0;
    for (std::size_t i = 1; i < full.size(); ++i) {
      if (!taken[i] && min_angle[i] > pick_angle) {
        pick_angle = min_angle[i];
        pick = i;
      }
    }
    take(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<QPoint> pts{full[0]};
  for (auto idx : chosen) pts.push_back(full[idx]);
  return QScheme(std::move(pts));
}

AngularNeighborhood build_angular_neighborhood(const DirectionSet& dirs, double half_angle_deg) {
  if (!(half_angle_deg > 0.0 && half_angle_deg < 90.0)) {
    throw std::invalid_argument("cone half angle must lie in (0, 90) degrees");
  }
  AngularNeighborhood nbh;
  nbh.cone_half_angle_deg = half_angle_deg;
  nbh.adjacency.resize(dirs.size());
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    for (std::size_t e = 0; e < dirs.size(); ++e) {
      if (d == e || angle_between(dirs[d], dirs[e]) <= half_angle_deg) nbh.adjacency[d].push_back(e);
    }
  }
  return nbh;
}

double angle_between(const Vec3& d1, const Vec3& d2) {
  if (std::abs(d1.norm() - 1.0) > kUnitTolerance || std::abs(d2.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("direction not normalized");
  }
  // atan2 form equals acos(|d1.d2|) on the unit sphere and is exact at 0.
  return antipodal_angle_rad(d1, d2) * 180.0 / std::numbers::pi;
}

double min_pairwise_angle(const std::vector<Vec3>& dirs) {
  double m = std::numbers::pi;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) m = std::min(m, antipodal_angle_rad(dirs[i], dirs[j]));
  }
  return m * 180.0 / std::numbers::pi;
}

void write_directions(std::ostream& os, const DirectionSet& dirs) {
  for (const auto& d : dirs.directions()) {
    os << format17(d.x()) << ' ' << format17(d.y()) << ' ' << format17(d.z()) << '\n';
  }
}

DirectionSet read_directions(std::istream& is) {
  std::vector<Vec3> v;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    Vec3 d;
    if (!(ls >> d.x() >> d.y() >> d.z())) throw DataError("malformed direction line: " + line);
    v.push_back(d);
  }
  return DirectionSet(std::move(v));
}

void write_qscheme(std::ostream& os, const QScheme& q) {
  os << "0 0 0 0\n";
  for (std::size_t i = 1; i < q.size(); ++i) {
    const auto& p = q[i];
    os << format17(p.b_value) << ' ' << format17(p.direction.x()) << ' ' << format17(p.direction.y()) << ' '
       << format17(p.direction.z()) << '\n';
  }
}

QScheme read_qscheme(std::istream& is) {
  std::vector<QPoint> pts;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    QPoint p;
    if (!(ls >> p.b_value >> p.direction.x() >> p.direction.y() >> p.direction.z())) {
      throw DataError("malformed q-scheme line: " + line);
    }
    pts.push_back(p);
  }
  try {
    return QScheme(std::move(pts));
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
}

}  // namespace fodkq
