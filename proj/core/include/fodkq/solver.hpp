#pragma once

#include "fodkq/geometry.hpp"
#include "fodkq/kq_operator.hpp"
#include "fodkq/layout.hpp"
#include "fodkq/measurements.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace fodkq {

struct SolverConfig {
  double kappa = std::numeric_limits<double>::infinity();  // weighted-l1 radius
  double gamma = 0.0;          // step on the true gradient; <= 0 means 0.95 / (2 ||A||^2)
  double inner_tol = 1e-5;     // relative change stopping FISTA
  int inner_max_iter = 2000;
  int reweight_cycles = 10;
  double reweight_tol = 1e-3;
  double tau_floor = 0.0;      // <= 0 means 1e-6 * max(1, Var(first B))
  double cone_half_angle_deg = 15.0;
  double norm_tol = 1e-6;      // power iteration
  int norm_max_iter = 500;

  void validate() const;
};

/// Strictly positive weights, fiber directions x white-matter voxels.
struct WeightMatrix {
  Eigen::MatrixXd w;

  [[nodiscard]] static WeightMatrix ones(Eigen::Index rows, Eigen::Index cols) {
    return {Eigen::MatrixXd::Ones(rows, cols)};
  }
};

struct ReweightState {
  Eigen::MatrixXd b;  // blurred support
  double tau = 0.0;
  double tau_floor = 0.0;
  int cycle = 0;      // number of weight updates applied so far
};

/// Spatial (26-connected, self included) and angular (cone) neighborhoods
/// over the white-matter voxels and dictionary directions.
struct NeighborhoodIndex {
  std::vector<std::vector<std::size_t>> spatial;  // per WM column: WM columns
  AngularNeighborhood angular;
};

[[nodiscard]] NeighborhoodIndex build_neighborhood_index(const TissueLayout& layout, const VolumeShape& shape,
                                                         const DirectionSet& dirs, double cone_half_angle_deg);

/// Euclidean projection onto {y >= 0, sum w_i y_i <= kappa}: y = max(x - theta w, 0)
/// with the threshold found exactly by shrinking the candidate support.
void project_weighted_l1_positive(std::span<const double> x, std::span<const double> w, double kappa,
                                  std::span<double> out);
[[nodiscard]] Eigen::MatrixXd project_weighted_l1_positive(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                                                           double kappa);

[[nodiscard]] Eigen::VectorXd project_positive(const Eigen::VectorXd& x);

/// Data-fidelity problem ||A(Z(S)) - y||^2.
struct Problem {
  const KqOperator& op;
  const KqData& data;

  [[nodiscard]] double objective(const FodField& s) const { return (op.apply(s) - data).squared_norm(); }
  /// 2 Z^T A^T (A Z S - y)
  [[nodiscard]] FodField gradient(const FodField& s) const;
};

struct FistaStats {
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  double objective = 0.0;
};

/// Projected FISTA with function-value restart. `cfg.gamma` must already be
/// resolved (> 0).
[[nodiscard]] FodField fista_solve(const Problem& problem, const WeightMatrix& w, const SolverConfig& cfg,
                                   const FodField& init, FistaStats* stats = nullptr);

/// B_{d,v} = (1 / |N(v)|) sum_{v' in N(v)} sum_{d' in N(d)} |s1_{d',v'}|.
[[nodiscard]] Eigen::MatrixXd compute_blur(const Eigen::MatrixXd& s1, const NeighborhoodIndex& idx);

/// First call: tau = max(Var(B), floor); later calls: tau = max(tau / 10, floor).
/// Returns W = 1 / (tau + B).
[[nodiscard]] WeightMatrix update_weights(ReweightState& state, const Eigen::MatrixXd& b_new, const SolverConfig& cfg);

struct CycleLog {
  int cycle = 0;
  int inner_iterations = 0;
  double objective = 0.0;
  double s1_l1_mass = 0.0;
  double tau = 0.0;
  double relative_change = 0.0;
  bool inner_converged = false;
};

struct ReweightResult {
  FodField field;
  std::vector<CycleLog> log;
  WeightMatrix final_weights;  // weights used in the last solve
  double gamma = 0.0;
  double operator_norm = 0.0;
  bool early_stop = false;
};

/// Reweighting loop around fista_solve, warm-started across cycles, with
/// W^(0) = 1. When cfg.gamma <= 0 the step is derived from a power-iteration
/// estimate of ||A|| seeded by `seed`.
[[nodiscard]] ReweightResult reweighted_solve(const Problem& problem, const NeighborhoodIndex& idx,
                                              const SolverConfig& cfg, std::uint64_t seed,
                                              std::optional<FodField> init = std::nullopt,
                                              const std::function<void(const CycleLog&)>& on_cycle = {});

}  // namespace fodkq
