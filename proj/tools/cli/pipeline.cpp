#include "pipeline.hpp"

#include <fodkq/dictionary.hpp>
#include <fodkq/kq_operator.hpp>
#include <fodkq/layout.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <thread>

namespace fodkq::cli {

int thread_budget() {
  if (const char* env = std::getenv("FODKQ_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::string CellKey::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "q%d_a%g_r%d", q_points, acceleration, repetition);
  return buf;
}

Scenario build_scenario(const ExperimentConfig& cfg) {
  Scenario sc;
  sc.full_scheme = QScheme::single_shell(cfg.b_value, generate_directions(static_cast<std::size_t>(cfg.full_q_points),
                                                                          cfg.seeds.directions));
  sc.dictionary_dirs = generate_directions(static_cast<std::size_t>(cfg.dictionary_size), cfg.seeds.directions + 1);
  sc.truth = rasterize_phantom(cfg.phantom);
  if (cfg.snap_to_grid) sc.truth = snap_to_grid(sc.truth, sc.dictionary_dirs);
  return sc;
}

CellSeeds cell_seeds(const ExperimentConfig& cfg, const CellKey& key) {
  const auto r = static_cast<std::uint64_t>(key.repetition);
  return {cfg.seeds.noise + r, cfg.seeds.masks + r};
}

Eigen::MatrixXcd estimate_phase_from_measurements(const KqMeasurements& m, const VolumeShape& shape) {
  const auto& d = m.data;
  Eigen::MatrixXcd k(static_cast<Eigen::Index>(d.blocks.size()), static_cast<Eigen::Index>(shape.voxels()));
  for (int q = 0; q < d.gradients; ++q) {
    for (int c = 0; c < d.coils; ++c) {
      k.row(static_cast<Eigen::Index>(q) * d.coils + c) = unpack_kspace(d.block(q, c), m.masks, q).transpose();
    }
  }
  return estimate_phase(k, shape, m.masks.central_fraction);
}

double phase_agreement(const Eigen::MatrixXcd& est, const Eigen::MatrixXcd& truth, const Eigen::VectorXd& s0) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols() || est.cols() != s0.size()) {
    throw DataError("phase maps do not match");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (Eigen::Index v = 0; v < est.cols(); ++v) {
    if (!(s0[v] > 0.0)) continue;
    for (Eigen::Index r = 0; r < est.rows(); ++r) sum += (std::conj(est(r, v)) * truth(r, v)).real();
    n += static_cast<std::size_t>(est.rows());
  }
  return n ? sum / static_cast<double>(n) : 1.0;
}

AcquiredCell acquire_cell(const ExperimentConfig& cfg, const Scenario& sc, const CellKey& key) {
  const auto& shape = sc.truth.shape;
  const auto seeds = cell_seeds(cfg, key);
  AcquiredCell cell;
  cell.scheme = subset_q_points(sc.full_scheme, static_cast<std::size_t>(key.q_points));
  const Eigen::MatrixXd signal = synthesize_q_signal(sc.truth, cell.scheme, TensorParams{});
  const auto masks = generate_masks(shape.nx, shape.ny, shape.nz, static_cast<int>(cell.scheme.size()),
                                    key.acceleration, cfg.central_fraction, seeds.masks);
  cell.sensitivities =
      cfg.coils == 1 ? SensitivityMap::unit(shape.voxels()) : synthetic_coil_sensitivities(shape, cfg.coils);
  cell.acquisition = acquire(signal, shape, masks, cfg.snr, cfg.phase_mode, cell.sensitivities, seeds.noise);
  if (cfg.phase_mode != PhaseMode::None) {
    cell.estimated_phase = estimate_phase_from_measurements(cell.acquisition.measurements, shape);
    cell.phase_agreement = phase_agreement(cell.estimated_phase, cell.acquisition.true_phase, sc.truth.s0);
  }
  return cell;
}

Reconstruction reconstruct(const ExperimentConfig& cfg, const Eigen::VectorXd& s0, const DirectionSet& dirs,
                           const QScheme& scheme, const KqMeasurements& meas, const SensitivityMap& sens,
                           const Eigen::MatrixXcd& phase, const std::function<void(const CycleLog&)>& on_cycle,
                           int threads) {
  const auto start = std::chrono::steady_clock::now();
  const VolumeShape shape{meas.masks.rows, meas.masks.cols, meas.masks.slices};
  if (static_cast<std::size_t>(s0.size()) != shape.voxels()) throw DataError("s0 does not match the measurement grid");
  if (static_cast<int>(scheme.size()) != meas.masks.gradients) {
    throw DataError("q-scheme size does not match the measurements");
  }

  const auto dict = build_dictionary(scheme, dirs, TensorParams{}, {kGrayMatterDiffusivity});
  auto layout = std::make_shared<const TissueLayout>(TissueLayout::white_matter_where(s0));
  if (layout->wm_voxels.empty()) throw DataError("s0 has no nonzero voxels");
  CalibrationData calib{s0, sens, phase};
  KqOperator op(dict, layout, calib, meas.masks, shape);
  op.set_threads(threads > 0 ? threads : thread_budget());

  SolverConfig sc = cfg.solver;
  if (!cfg.kappa_explicit) sc.kappa = cfg.kappa_per_voxel * static_cast<double>(layout->wm_voxels.size());
  const auto idx = build_neighborhood_index(*layout, shape, dirs, sc.cone_half_angle_deg);

  Reconstruction rec;
  rec.kappa = sc.kappa;
  const Problem problem{op, meas.data};
  rec.result = reweighted_solve(problem, idx, sc, cfg.seeds.directions, std::nullopt, on_cycle);
  for (const auto& c : rec.result.log) rec.total_iterations += c.inner_iterations;
  rec.peaks = extract_peak_field(rec.result.field, shape, dirs, idx.angular);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

CellResult run_cell(const ExperimentConfig& cfg, const Scenario& sc, const CellKey& key,
                    const std::function<void(const CycleLog&)>& on_cycle, int threads) {
  const auto cell = acquire_cell(cfg, sc, key);
  Eigen::MatrixXcd phase;
  if (cfg.phase_mode != PhaseMode::None) {
    phase = cfg.phase_estimation == PhaseEstimation::True ? cell.acquisition.true_phase : cell.estimated_phase;
  }
  const auto rec = reconstruct(cfg, sc.truth.s0, sc.dictionary_dirs, cell.scheme, cell.acquisition.measurements,
                               cell.sensitivities, phase, on_cycle, threads);
  CellResult out;
  out.key = key;
  out.image_units = image_units(key.q_points, key.acceleration);
  out.report = evaluate(rec.peaks, sc.truth);
  out.total_iterations = rec.total_iterations;
  out.cycles = static_cast<int>(rec.result.log.size());
  out.seconds = rec.seconds;
  out.phase_agreement = cell.phase_agreement;
  return out;
}

}  // namespace fodkq::cli
