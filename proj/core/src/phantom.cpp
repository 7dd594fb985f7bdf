#include "fodkq/phantom.hpp"

#include "fodkq/fft.hpp"
#include "fodkq/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace fodkq {
namespace {

using nlohmann::json;

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 arc_point(const ArcCenterline& a, double t_deg) {
  const double t = t_deg * kDeg;
  return a.center + a.radius * (std::cos(t) * a.u + std::sin(t) * a.v);
}

Vec3 arc_tangent(const ArcCenterline& a, double t_deg) {
  const double t = t_deg * kDeg;
  return (-std::sin(t) * a.u + std::cos(t) * a.v).normalized();
}

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

ClosestPoint closest_point(const Centerline& curve, const Vec3& p) {
  if (const auto* line = std::get_if<LineCenterline>(&curve)) {
    const Vec3 seg = line->to - line->from;
    const double t = std::clamp((p - line->from).dot(seg) / seg.squaredNorm(), 0.0, 1.0);
    return {(p - (line->from + t * seg)).norm(), seg.normalized()};
  }
  const auto& arc = std::get<ArcCenterline>(curve);
  const Vec3 rel = p - arc.center;
  const double phi = std::atan2(rel.dot(arc.v), rel.dot(arc.u)) / kDeg;
  double t = arc.start_deg + std::fmod(phi - arc.start_deg + 720.0, 360.0);
  if (t > arc.end_deg) {
    const double ds = (p - arc_point(arc, arc.start_deg)).norm();
    const double de = (p - arc_point(arc, arc.end_deg)).norm();
    t = ds <= de ? arc.start_deg : arc.end_deg;
  }
  return {(p - arc_point(arc, t)).norm(), arc_tangent(arc, t)};
}

Vec3 curve_point(const Centerline& curve, double s) {
  if (const auto* line = std::get_if<LineCenterline>(&curve)) return line->from + s * (line->to - line->from);
  const auto& arc = std::get<ArcCenterline>(curve);
  return arc_point(arc, arc.start_deg + s * (arc.end_deg - arc.start_deg));
}

PhaseMode parse_phase_mode(const std::string& s) {
  if (s == "none") return PhaseMode::None;
  if (s == "linear") return PhaseMode::Linear;
  throw std::invalid_argument("unknown phase mode: " + s);
}

std::string to_string(PhaseMode m) { return m == PhaseMode::Linear ? "linear" : "none"; }

void PhantomSpec::validate() const {
  if (!volume_shape.valid()) throw std::invalid_argument("phantom volume shape must be positive");
  if (bundles.empty()) throw std::invalid_argument("phantom needs at least one bundle");
  for (const auto& b : bundles) {
    if (b.weight < 1 || b.weight > 5) throw std::invalid_argument("bundle weight must lie in 1..5");
    if (!(b.radius > 0.0)) throw std::invalid_argument("bundle radius must be positive");
    if (const auto* line = std::get_if<LineCenterline>(&b.centerline)) {
      if ((line->to - line->from).norm() < 1e-12) throw std::invalid_argument("degenerate line centerline");
    } else {
      const auto& arc = std::get<ArcCenterline>(b.centerline);
      if (!(arc.radius > 0.0) || !(arc.end_deg > arc.start_deg) || arc.end_deg - arc.start_deg > 360.0) {
        throw std::invalid_argument("arc centerline needs radius > 0 and 0 < end - start <= 360");
      }
      if (std::abs(arc.u.norm() - 1.0) > 1e-9 || std::abs(arc.v.norm() - 1.0) > 1e-9 ||
          std::abs(arc.u.dot(arc.v)) > 1e-9) {
        throw std::invalid_argument("arc axes u, v must be orthonormal");
      }
    }
  }
}

PhantomSpec parse_phantom_spec(const std::string& json_text) {
  PhantomSpec spec;
  try {
    const json j = json::parse(json_text);
    const auto& shape = j.at("volume_shape");
    spec.volume_shape = {shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>()};
    spec.snr = j.value("snr", 30.0);
    spec.phase_mode = parse_phase_mode(j.value("phase_mode", std::string("none")));
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& jb : j.at("bundles")) {
      Bundle b;
      b.radius = jb.at("radius").get<double>();
      b.weight = jb.at("weight").get<int>();
      const auto& c = jb.at("centerline");
      const auto type = c.at("type").get<std::string>();
      if (type == "line") {
        b.centerline = LineCenterline{vec_from_json(c.at("from")), vec_from_json(c.at("to"))};
      } else if (type == "arc") {
        ArcCenterline a;
        a.center = vec_from_json(c.at("center"));
        a.radius = c.at("radius").get<double>();
        a.start_deg = c.at("start_deg").get<double>();
        a.end_deg = c.at("end_deg").get<double>();
        if (c.contains("u")) a.u = vec_from_json(c.at("u"));
        if (c.contains("v")) a.v = vec_from_json(c.at("v"));
        b.centerline = a;
      } else {
        throw std::invalid_argument("unknown centerline type: " + type);
      }
      spec.bundles.push_back(b);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid phantom spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

std::string phantom_spec_to_json(const PhantomSpec& spec) {
  json j;
  j["volume_shape"] = {spec.volume_shape.nx, spec.volume_shape.ny, spec.volume_shape.nz};
  j["snr"] = spec.snr;
  j["phase_mode"] = to_string(spec.phase_mode);
  j["seed"] = spec.seed;
  j["bundles"] = json::array();
  for (const auto& b : spec.bundles) {
    json jb{{"radius", b.radius}, {"weight", b.weight}};
    if (const auto* line = std::get_if<LineCenterline>(&b.centerline)) {
      jb["centerline"] = {{"type", "line"}, {"from", vec_to_json(line->from)}, {"to", vec_to_json(line->to)}};
    } else {
      const auto& a = std::get<ArcCenterline>(b.centerline);
      jb["centerline"] = {{"type", "arc"},          {"center", vec_to_json(a.center)}, {"radius", a.radius},
                          {"start_deg", a.start_deg}, {"end_deg", a.end_deg},          {"u", vec_to_json(a.u)},
                          {"v", vec_to_json(a.v)}};
    }
    j["bundles"].push_back(jb);
  }
  return j.dump(2);
}

std::size_t GroundTruth::fiber_voxel_count() const {
  return static_cast<std::size_t>(
      std::count_if(fibers.begin(), fibers.end(), [](const auto& f) { return !f.empty(); }));
}

GroundTruth rasterize_phantom(const PhantomSpec& spec) {
  spec.validate();
  const auto& shape = spec.volume_shape;
  for (const auto& b : spec.bundles) {
    for (int i = 0; i <= 256; ++i) {
      const Vec3 p = curve_point(b.centerline, i / 256.0);
      if (p.x() < -0.5 || p.x() > shape.nx - 0.5 || p.y() < -0.5 || p.y() > shape.ny - 0.5 || p.z() < -0.5 ||
          p.z() > shape.nz - 0.5) {
        throw DataError("bundle out of bounds");
      }
    }
  }

  GroundTruth gt;
  gt.shape = shape;
  gt.fibers.resize(shape.voxels());
  gt.s0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.voxels()));
  for (std::size_t v = 0; v < shape.voxels(); ++v) {
    const auto [x, y, z] = shape.coords(v);
    const Vec3 center(x, y, z);
    auto& fib = gt.fibers[v];
    for (const auto& b : spec.bundles) {
      const auto cp = closest_point(b.centerline, center);
      if (cp.distance <= b.radius) {
        fib.push_back({canonicalize(cp.tangent), 0.0});
        gt.s0(static_cast<Eigen::Index>(v)) += b.weight;
      }
    }
    for (auto& f : fib) f.fraction = 1.0 / static_cast<double>(fib.size());
  }
  return gt;
}

GroundTruth snap_to_grid(const GroundTruth& gt, const DirectionSet& dirs) {
  GroundTruth out = gt;
  for (auto& fib : out.fibers) {
    std::vector<std::pair<std::size_t, double>> merged;
    for (const auto& f : fib) {
      const auto idx = dirs.nearest(f.direction);
      auto it = std::find_if(merged.begin(), merged.end(), [&](const auto& m) { return m.first == idx; });
      if (it == merged.end()) {
        merged.emplace_back(idx, f.fraction);
      } else {
        it->second += f.fraction;
      }
    }
    fib.clear();
    for (const auto& [idx, frac] : merged) fib.push_back({dirs[idx], frac});
  }
  return out;
}

Eigen::MatrixXd synthesize_q_signal(const GroundTruth& gt, const QScheme& q, const TensorParams& wm) {
  wm.validate();
  const auto n_vox = static_cast<Eigen::Index>(gt.shape.voxels());
  Eigen::MatrixXd sig = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(q.size()), n_vox);
  for (Eigen::Index v = 0; v < n_vox; ++v) {
    const auto& fib = gt.fibers[static_cast<std::size_t>(v)];
    if (fib.empty()) continue;
    for (std::size_t r = 0; r < q.size(); ++r) {
      double s = 0.0;
      for (const auto& f : fib) s += f.fraction * fiber_response(wm, f.direction, q[r].b_value, q[r].direction);
      sig(static_cast<Eigen::Index>(r), v) = gt.s0(v) * s;
    }
  }
  return sig;
}

Eigen::VectorXcd linear_phase_slice(int rows, int cols, double shift_rows, double shift_cols) {
  Eigen::VectorXcd ph(static_cast<Eigen::Index>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double a = 2.0 * std::numbers::pi * (shift_rows * r / rows + shift_cols * c / cols);
      ph(static_cast<Eigen::Index>(r) * cols + c) = std::polar(1.0, a);
    }
  }
  return ph;
}

Acquisition acquire(const Eigen::MatrixXd& signal, const VolumeShape& shape, const SamplingMask& masks, double snr,
                    PhaseMode phase_mode, const SensitivityMap& sens, std::uint64_t seed) {
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be positive");
  const auto n_vox = shape.voxels();
  if (static_cast<std::size_t>(signal.cols()) != n_vox || signal.rows() != masks.gradients ||
      masks.rows != shape.nx || masks.cols != shape.ny || masks.slices != shape.nz) {
    throw DataError("signal shape does not match the sampling masks");
  }
  if (static_cast<std::size_t>(sens.maps.cols()) != n_vox) throw DataError("sensitivity maps do not match the volume");

  double s0_sum = 0.0;
  std::size_t s0_count = 0;
  for (Eigen::Index v = 0; v < signal.cols(); ++v) {
    if (signal(0, v) > 0.0) {
      s0_sum += signal(0, v);
      ++s0_count;
    }
  }
  const double mean_s0 = s0_count ? s0_sum / static_cast<double>(s0_count) : 0.0;
  const double sigma = std::isinf(snr) ? 0.0 : mean_s0 / snr;

  const int coils = sens.coils();
  const int gradients = masks.gradients;
  const auto slice_n = shape.slice_size();
  Acquisition out;
  out.measurements.masks = masks;
  out.measurements.snr = snr;
  out.measurements.noise_sigma = sigma;
  out.measurements.data = KqData::zeros(masks, coils);
  if (phase_mode == PhaseMode::Linear) {
    out.true_phase.resize(static_cast<Eigen::Index>(gradients) * coils, static_cast<Eigen::Index>(n_vox));
  }

  std::vector<Complex> buf(slice_n);
  for (int q = 0; q < gradients; ++q) {
    for (int s = 0; s < shape.nz; ++s) {
      Eigen::VectorXcd phase = Eigen::VectorXcd::Ones(static_cast<Eigen::Index>(slice_n));
      if (phase_mode == PhaseMode::Linear) {
        auto rng = substream(seed, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(s)}, StreamTag::Phase);
        std::uniform_real_distribution<double> shift(-2.0, 2.0);
        const double sr = shift(rng);
        const double sc = shift(rng);
        phase = linear_phase_slice(shape.nx, shape.ny, sr, sc);
      }
      const auto base = static_cast<Eigen::Index>(static_cast<std::size_t>(s) * slice_n);
      for (int c = 0; c < coils; ++c) {
        if (phase_mode == PhaseMode::Linear) {
          out.true_phase.row(static_cast<Eigen::Index>(q) * coils + c).segment(base, phase.size()) =
              phase.transpose();
        }
        for (std::size_t i = 0; i < slice_n; ++i) {
          const auto v = base + static_cast<Eigen::Index>(i);
          buf[i] = signal(q, v) * sens.maps(c, v) * phase(static_cast<Eigen::Index>(i));
        }
        fft2(buf, shape.nx, shape.ny, false);
        if (sigma > 0.0) {
          auto rng = substream(
              seed, {static_cast<std::uint64_t>(q), static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(c)},
              StreamTag::Noise);
          std::normal_distribution<double> noise(0.0, sigma);
          for (auto& z : buf) {
            const double re = noise(rng);
            const double im = noise(rng);
            z += Complex(re, im);
          }
        }
        // write the selected points into the packed block
        auto& block = out.measurements.data.block(q, c);
        Eigen::Index k = 0;
        for (int prev = 0; prev < s; ++prev) k += static_cast<Eigen::Index>(masks.count(q, prev));
        const auto off = masks.offset(q, s);
        for (std::size_t i = 0; i < slice_n; ++i) {
          if (masks.selected[off + i]) block(k++) = buf[i];
        }
      }
    }
  }
  return out;
}

}  // namespace fodkq
