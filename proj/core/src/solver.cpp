#include "fodkq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fodkq {

void SolverConfig::validate() const {
  if (std::isnan(kappa) || kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
  if (!(inner_tol >= 0.0)) throw std::invalid_argument("inner tolerance must be >= 0");
  if (inner_max_iter < 1) throw std::invalid_argument("inner_max_iter must be >= 1");
  if (reweight_cycles < 1) throw std::invalid_argument("reweight_cycles must be >= 1");
  if (!(cone_half_angle_deg > 0.0 && cone_half_angle_deg < 90.0)) {
    throw std::invalid_argument("cone half angle must lie in (0, 90)");
  }
}

NeighborhoodIndex build_neighborhood_index(const TissueLayout& layout, const VolumeShape& shape,
                                           const DirectionSet& dirs, double cone_half_angle_deg) {
  NeighborhoodIndex idx;
  idx.angular = build_angular_neighborhood(dirs, cone_half_angle_deg);
  std::vector<std::ptrdiff_t> column(shape.voxels(), -1);
  for (std::size_t k = 0; k < layout.wm_voxels.size(); ++k) column[layout.wm_voxels[k]] = static_cast<std::ptrdiff_t>(k);
  idx.spatial.resize(layout.wm_voxels.size());
  for (std::size_t k = 0; k < layout.wm_voxels.size(); ++k) {
    const auto [x, y, z] = shape.coords(layout.wm_voxels[k]);
    for (int dz = -1; dz <= 1; ++dz) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          const int nx = x + dx, ny = y + dy, nz = z + dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= shape.nx || ny >= shape.ny || nz >= shape.nz) continue;
          const auto col = column[shape.index(nx, ny, nz)];
          if (col >= 0) idx.spatial[k].push_back(static_cast<std::size_t>(col));
        }
      }
    }
    std::sort(idx.spatial[k].begin(), idx.spatial[k].end());
  }
  return idx;
}

void project_weighted_l1_positive(std::span<const double> x, std::span<const double> w, double kappa,
                                  std::span<double> out) {
  if (std::isnan(kappa) || kappa < 0.0) throw std::invalid_argument("kappa must be >= 0");
  if (x.size() != w.size() || x.size() != out.size()) throw std::invalid_argument("projection: size mismatch");

  double mass = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("projection weights must be positive");
    if (x[i] > 0.0) mass += w[i] * x[i];
  }
  if (mass <= kappa) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i], 0.0);
    return;
  }

  // Solve sum_i w_i max(x_i - theta w_i, 0) = kappa. Start from every
  // positive entry; the threshold of the current set never exceeds the
  // optimum, so entries at or below it can be dropped until the set is stable.
  std::vector<double> ax, aw;
  ax.reserve(x.size());
  aw.reserve(x.size());
  double sum_wx = 0.0;
  double sum_ww = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) {
      ax.push_back(x[i]);
      aw.push_back(w[i]);
      sum_wx += w[i] * x[i];
      sum_ww += w[i] * w[i];
    }
  }
  double theta = (sum_wx - kappa) / sum_ww;
  while (true) {
    std::size_t kept = 0;
    double nwx = 0.0;
    double nww = 0.0;
    for (std::size_t k = 0; k < ax.size(); ++k) {
      if (ax[k] > theta * aw[k]) {
        ax[kept] = ax[k];
        aw[kept] = aw[k];
        nwx += aw[k] * ax[k];
        nww += aw[k] * aw[k];
        ++kept;
      }
    }
    if (kept == ax.size() || kept == 0) break;
    ax.resize(kept);
    aw.resize(kept);
    theta = (nwx - kappa) / nww;
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i] - theta * w[i], 0.0);
}

Eigen::MatrixXd project_weighted_l1_positive(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, double kappa) {
  if (x.rows() != w.rows() || x.cols() != w.cols()) throw std::invalid_argument("projection: shape mismatch");
  Eigen::MatrixXd out(x.rows(), x.cols());
  const auto n = static_cast<std::size_t>(x.size());
  project_weighted_l1_positive({x.data(), n}, {w.data(), n}, kappa, {out.data(), n});
  return out;
}

Eigen::VectorXd project_positive(const Eigen::VectorXd& x) { return x.cwiseMax(0.0); }

FodField Problem::gradient(const FodField& s) const {
  FodField g = op.apply_adjoint(op.apply(s) - data);
  g *= 2.0;
  return g;
}

FodField fista_solve(const Problem& problem, const WeightMatrix& w, const SolverConfig& cfg, const FodField& init,
                     FistaStats* stats) {
  cfg.validate();
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("fista_solve: stepsize must be resolved and positive");
  if (w.w.rows() != init.s1.rows() || w.w.cols() != init.s1.cols()) {
    throw std::invalid_argument("weight matrix shape does not match S1");
  }
  const auto& op = problem.op;
  const auto& data = problem.data;
  auto project = [&](FodField& s) {
    s.s1 = project_weighted_l1_positive(s.s1, w.w, cfg.kappa);
    s.s2 = project_positive(s.s2);
    s.s3 = project_positive(s.s3);
  };

  FistaStats st;
  FodField x = init;
  KqData ax = op.apply(x);
  double f = (ax - data).squared_norm();
  FodField y = x;
  KqData ay = ax;
  double zeta = 1.0;
  bool momentum = false;

  for (int it = 1; it <= cfg.inner_max_iter; ++it) {
    st.iterations = it;
    FodField next = y;
    next.axpy(-2.0 * cfg.gamma, op.apply_adjoint(ay - data));
    project(next);
    if (!next.all_finite()) throw NumericalError("divergence: check stepsize");
    KqData a_next = op.apply(next);
    const double f_next = (a_next - data).squared_norm();
    if (!std::isfinite(f_next)) throw NumericalError("divergence: check stepsize");

    if (momentum && f_next > f) {
      // restart from the last accepted point without momentum
      zeta = 1.0;
      y = x;
      ay = ax;
      momentum = false;
      ++st.restarts;
      continue;
    }

    // plain steps right after a (re)start are small by construction; testing
    // them would end a warm-started run after one iteration
    const bool extrapolated = momentum;
    const double zeta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * zeta * zeta));
    const double beta = (zeta - 1.0) / zeta_next;
    const double change = (next - x).norm();
    const double ref = x.norm();

    y = next;
    y.axpy(beta, next - x);
    ay = a_next;
    ay.axpy(beta, a_next - ax);
    momentum = beta > 0.0;

    x = std::move(next);
    ax = std::move(a_next);
    f = f_next;
    zeta = zeta_next;
    if (extrapolated && ref > 0.0 && change < cfg.inner_tol * ref) {
      st.converged = true;
      break;
    }
  }
  st.objective = f;
  if (stats) *stats = st;
  return x;
}

Eigen::MatrixXd compute_blur(const Eigen::MatrixXd& s1, const NeighborhoodIndex& idx) {
  if (static_cast<std::size_t>(s1.rows()) != idx.angular.size() || static_cast<std::size_t>(s1.cols()) != idx.spatial.size()) {
    throw std::invalid_argument("compute_blur: S1 shape does not match the neighborhoods");
  }
  const Eigen::MatrixXd mag = s1.cwiseAbs();
  Eigen::MatrixXd ang = Eigen::MatrixXd::Zero(s1.rows(), s1.cols());
  for (Eigen::Index v = 0; v < s1.cols(); ++v) {
    for (Eigen::Index d = 0; d < s1.rows(); ++d) {
      double s = 0.0;
      for (auto e : idx.angular[static_cast<std::size_t>(d)]) s += mag(static_cast<Eigen::Index>(e), v);
      ang(d, v) = s;
    }
  }
  Eigen::MatrixXd b(s1.rows(), s1.cols());
  for (Eigen::Index v = 0; v < s1.cols(); ++v) {
    const auto& nb = idx.spatial[static_cast<std::size_t>(v)];
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(s1.rows());
    for (auto u : nb) acc += ang.col(static_cast<Eigen::Index>(u));
    b.col(v) = acc / static_cast<double>(nb.size());
  }
  return b;
}

WeightMatrix update_weights(ReweightState& state, const Eigen::MatrixXd& b_new, const SolverConfig& cfg) {
  if ((b_new.array() < 0.0).any()) throw std::invalid_argument("blurred support must be nonnegative");
  if (state.cycle == 0) {
    double var = 0.0;
    if (b_new.size() > 0) {
      const double mean = b_new.mean();
      var = (b_new.array() - mean).square().mean();
    }
    state.tau_floor = cfg.tau_floor > 0.0 ? cfg.tau_floor : 1e-6 * std::max(1.0, var);
    state.tau = std::max(var, state.tau_floor);
  } else {
    state.tau = std::max(state.tau / 10.0, state.tau_floor);
  }
  state.b = b_new;
  ++state.cycle;
  return {(state.tau + b_new.array()).inverse().matrix()};
}

ReweightResult reweighted_solve(const Problem& problem, const NeighborhoodIndex& idx, const SolverConfig& cfg,
                                std::uint64_t seed, std::optional<FodField> init,
                                const std::function<void(const CycleLog&)>& on_cycle) {
  cfg.validate();
  ReweightResult res;
  SolverConfig inner = cfg;
  if (!(inner.gamma > 0.0)) {
    const auto sn = spectral_norm(problem.op, cfg.norm_tol, cfg.norm_max_iter, seed);
    res.operator_norm = sn.norm;
    if (!(sn.norm > 0.0)) throw NumericalError("measurement operator is identically zero");
    inner.gamma = 0.95 / (2.0 * sn.norm * sn.norm);
  }
  res.gamma = inner.gamma;

  FodField s = init ? std::move(*init) : problem.op.zero_field();
  WeightMatrix w = WeightMatrix::ones(s.s1.rows(), s.s1.cols());
  ReweightState state;
  for (int t = 0; t < cfg.reweight_cycles; ++t) {
    FistaStats fs;
    FodField next = fista_solve(problem, w, inner, s, &fs);
    const double n_next = next.s1.norm();
    const double diff = (next.s1 - s.s1).norm();
    const double rel = n_next > 0.0 ? diff / n_next : (diff == 0.0 ? 0.0 : 1.0);

    res.final_weights = w;
    w = update_weights(state, compute_blur(next.s1, idx), cfg);

    CycleLog log{t, fs.iterations, fs.objective, next.s1.sum(), state.tau, rel, fs.converged};
    res.log.push_back(log);
    if (on_cycle) on_cycle(log);
    s = std::move(next);
    if (rel < cfg.reweight_tol) {
      res.early_stop = true;
      break;
    }
  }
  res.field = std::move(s);
  return res;
}

}  // namespace fodkq
