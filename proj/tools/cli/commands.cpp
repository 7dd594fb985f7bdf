#include "commands.hpp"

#include <fodkq/io.hpp>
#include <fodkq/sampling.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace fodkq::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::size_t> grid_dims(const VolumeShape& s) {
  return {static_cast<std::size_t>(s.nz), static_cast<std::size_t>(s.nx), static_cast<std::size_t>(s.ny)};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot write " + p.string());
  os << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw DataError("missing file " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

template <typename Fn>
auto with_file(const fs::path& p, Fn fn) {
  std::ifstream is(p);
  if (!is) throw DataError("missing file " + p.string());
  try {
    return fn(is);
  } catch (const DataError& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

fs::path cell_dir(const ExperimentConfig& cfg, const CellKey& key) { return cfg.output_dir / "cells" / key.id(); }

void write_fibers(const fs::path& p, const GroundTruth& gt) {
  PeakField pf{gt.shape, std::vector<PeakSet>(gt.fibers.size())};
  for (std::size_t v = 0; v < gt.fibers.size(); ++v) {
    for (const auto& f : gt.fibers[v]) pf.voxels[v].push_back({f.direction, f.fraction, 0});
  }
  std::ofstream os(p);
  write_peaks(os, pf);
}

VolumeShape shape_from_json(const json& j) {
  return {j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>()};
}

std::string csv_header() {
  return "q_points,acceleration,image_units,snr,phase_mode,repetition,noise_seed,mask_seed,success_rate,"
         "mean_angular_error,iterations,seconds,status";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_row(const ExperimentConfig& cfg, const CellKey& key, const CellSeeds& seeds, double sr, double err,
                    int iterations, double seconds, const std::string& status) {
  std::ostringstream os;
  os << key.q_points << ',' << fmt(key.acceleration) << ',' << fmt(image_units(key.q_points, key.acceleration)) << ','
     << fmt(cfg.snr) << ',' << to_string(cfg.phase_mode) << ',' << key.repetition << ',' << seeds.noise << ','
     << seeds.masks << ',' << fmt(sr) << ',' << fmt(err) << ',' << iterations << ',' << fmt(seconds) << ','
     << status;
  return os.str();
}

std::string hex_fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

template <typename T, typename Writer>
std::string hash_of(const T& v, Writer w) {
  std::ostringstream os;
  w(os, v);
  return hex_fnv1a(os.str());
}

void save_masks(const fs::path& stem, const SamplingMask& m, const VolumeShape& shape, std::uint64_t seed) {
  std::vector<std::size_t> mshape{static_cast<std::size_t>(m.gradients)};
  for (auto d : grid_dims(shape)) mshape.push_back(d);
  save_array(fs::path(stem).concat(".arr"), make_u8_array(m.selected, mshape, "sampling masks"));
  json side{{"grid", {m.rows, m.cols}},
            {"slices", m.slices},
            {"gradients", m.gradients},
            {"acceleration", m.acceleration},
            {"central_fraction", m.central_fraction},
            {"seed", seed}};
  write_text(fs::path(stem).concat(".json"), side.dump(2));
}

void save_dictionary(const fs::path& dir, const ResponseDictionary& d, const QScheme& q, const DirectionSet& dirs) {
  save_array(dir / "dictionary.arr", make_array(Eigen::MatrixXd(d.matrix), "response dictionary"));
  const auto& wm = d.white_matter;
  json side{{"qscheme_hash", hash_of(q, [](std::ostream& os, const QScheme& s) { write_qscheme(os, s); })},
            {"directions_hash", hash_of(dirs, [](std::ostream& os, const DirectionSet& s) { write_directions(os, s); })},
            {"white_matter", {wm.lambda1, wm.lambda2, wm.lambda3}},
            {"isotropic", d.iso_diffusivities},
            {"shape", {d.q_count(), d.atom_count()}}};
  write_text(dir / "dictionary.json", side.dump(2));
}

void print_summary(const GroundTruth& gt, std::ostream& out) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& f : gt.fibers) ++hist[f.size()];
  out << "voxels " << gt.fibers.size() << ", with fibers " << gt.fiber_voxel_count() << '\n';
  out << "fibers  voxels\n";
  for (const auto& [k, n] : hist) {
    char line[64];
    std::snprintf(line, sizeof line, "%6zu  %6zu\n", k, n);
    out << line;
  }
}

}  // namespace

GroundTruth load_ground_truth(const fs::path& dir) {
  const auto meta = read_json(dir / "phantom_meta.json");
  GroundTruth gt;
  gt.shape = shape_from_json(meta.at("volume_shape"));
  const auto s0 = load_array(dir / "s0.arr");
  gt.s0 = to_real_flat(s0);
  if (static_cast<std::size_t>(gt.s0.size()) != gt.shape.voxels()) throw DataError((dir / "s0.arr").string() + ": wrong size");
  const auto pf = with_file(dir / "truth.txt", [&](std::istream& is) { return read_peaks(is, gt.shape); });
  gt.fibers.resize(gt.shape.voxels());
  for (std::size_t v = 0; v < pf.voxels.size(); ++v) {
    for (const auto& p : pf.voxels[v]) gt.fibers[v].push_back({p.direction.normalized(), p.amplitude});
  }
  return gt;
}

void cmd_phantom(const ExperimentConfig& cfg, std::ostream& out) {
  const auto sc = build_scenario(cfg);
  fs::create_directories(cfg.output_dir);
  const auto& gt = sc.truth;
  save_array(cfg.output_dir / "s0.arr", make_array(gt.s0, "s0"));
  auto sig = make_array(Eigen::MatrixXd(synthesize_q_signal(gt, sc.full_scheme, TensorParams{})), "clean q-signal");
  sig.shape = {sc.full_scheme.size()};
  for (auto d : grid_dims(gt.shape)) sig.shape.push_back(d);
  save_array(cfg.output_dir / "signal.arr", sig);
  auto s0 = load_array(cfg.output_dir / "s0.arr");
  s0.shape = grid_dims(gt.shape);
  save_array(cfg.output_dir / "s0.arr", s0);
  write_fibers(cfg.output_dir / "truth.txt", gt);
  {
    std::ofstream os(cfg.output_dir / "qscheme.txt");
    write_qscheme(os, sc.full_scheme);
  }
  {
    std::ofstream os(cfg.output_dir / "dictionary_dirs.txt");
    write_directions(os, sc.dictionary_dirs);
  }
  write_text(cfg.output_dir / "phantom.json", phantom_spec_to_json(cfg.phantom));
  write_text(cfg.output_dir / "config.json", config_to_json(cfg));
  json meta{{"volume_shape", {gt.shape.nx, gt.shape.ny, gt.shape.nz}},
            {"fiber_voxels", gt.fiber_voxel_count()},
            {"seeds", {{"phantom", cfg.seeds.phantom}, {"directions", cfg.seeds.directions}}},
            {"snap_to_grid", cfg.snap_to_grid}};
  write_text(cfg.output_dir / "phantom_meta.json", meta.dump(2));
  print_summary(gt, out);
}

fs::path cmd_acquire(const ExperimentConfig& cfg, const CellKey& key, std::ostream& out) {
  const auto sc = build_scenario(cfg);
  const auto cell = acquire_cell(cfg, sc, key);
  const auto dir = cell_dir(cfg, key);
  fs::create_directories(dir);
  const auto& m = cell.acquisition.measurements;
  const auto& shape = sc.truth.shape;

  const auto seeds = cell_seeds(cfg, key);
  save_masks(dir / "masks", m.masks, shape, seeds.masks);

  Eigen::VectorXcd packed(static_cast<Eigen::Index>(m.data.sample_count()));
  json sizes = json::array();
  Eigen::Index k = 0;
  for (const auto& b : m.data.blocks) {
    packed.segment(k, b.size()) = b;
    k += b.size();
    sizes.push_back(b.size());
  }
  save_array(dir / "kq.arr", make_array(packed, "kq samples"));
  save_array(dir / "sens.arr", make_array(cell.sensitivities.maps, "coil sensitivities"));
  if (cfg.phase_mode != PhaseMode::None) {
    save_array(dir / "phase_true.arr", make_array(cell.acquisition.true_phase, "true phase"));
    save_array(dir / "phase_est.arr", make_array(cell.estimated_phase, "estimated phase"));
  }
  {
    std::ofstream os(dir / "qscheme.txt");
    write_qscheme(os, cell.scheme);
  }
  json meta{{"q_points", key.q_points},
            {"acceleration", key.acceleration},
            {"repetition", key.repetition},
            {"image_units", image_units(key.q_points, key.acceleration)},
            {"gradients", m.data.gradients},
            {"coils", m.data.coils},
            {"block_sizes", sizes},
            {"snr", std::isinf(m.snr) ? json("inf") : json(m.snr)},
            {"noise_sigma", m.noise_sigma},
            {"central_fraction", m.masks.central_fraction},
            {"phase_mode", to_string(cfg.phase_mode)},
            {"phase_agreement", cell.phase_agreement},
            {"seeds", {{"noise", seeds.noise}, {"masks", seeds.masks}}}};
  write_text(dir / "meta.json", meta.dump(2));
  out << key.id() << ": " << m.data.sample_count() << " samples, " << m.data.gradients << " gradients, factor "
      << fmt(undersampling_factor(m.masks, std::min(1, m.masks.gradients - 1))) << '\n';
  if (cfg.phase_mode != PhaseMode::None) out << "phase agreement " << fmt(cell.phase_agreement) << '\n';
  return dir;
}

bool cmd_reconstruct(const ExperimentConfig& cfg, const fs::path& dir, bool force, std::ostream& out) {
  if (!force && fs::exists(dir / "peaks.txt") && fs::exists(dir / "solver_log.json")) {
    out << dir.string() << ": up to date\n";
    return false;
  }
  const auto meta = read_json(dir / "meta.json");
  const auto pmeta = read_json(cfg.output_dir / "phantom_meta.json");
  const auto shape = shape_from_json(pmeta.at("volume_shape"));
  const auto s0_file = cfg.output_dir / "s0.arr";
  const Eigen::VectorXd s0 = to_real_flat(load_array(s0_file));
  if (static_cast<std::size_t>(s0.size()) != shape.voxels()) throw DataError(s0_file.string() + ": does not match the grid");
  const auto dirs = with_file(cfg.output_dir / "dictionary_dirs.txt", [](std::istream& is) { return read_directions(is); });
  const auto scheme = with_file(dir / "qscheme.txt", [](std::istream& is) { return read_qscheme(is); });

  const auto masks_file = dir / "masks.arr";
  const auto ma = load_array(masks_file);
  const int gradients = meta.at("gradients").get<int>();
  const int coils = meta.at("coils").get<int>();
  if (ma.dtype != DType::U8 || ma.shape.size() != 4 || ma.shape[0] != static_cast<std::size_t>(gradients) ||
      ma.shape[1] != static_cast<std::size_t>(shape.nz) || ma.shape[2] != static_cast<std::size_t>(shape.nx) ||
      ma.shape[3] != static_cast<std::size_t>(shape.ny)) {
    throw DataError(masks_file.string() + ": shape does not match the acquisition");
  }
  KqMeasurements m;
  m.masks.rows = shape.nx;
  m.masks.cols = shape.ny;
  m.masks.slices = shape.nz;
  m.masks.gradients = gradients;
  m.masks.acceleration = meta.at("acceleration").get<double>();
  m.masks.central_fraction = meta.at("central_fraction").get<double>();
  m.masks.selected = ma.payload;
  m.noise_sigma = meta.at("noise_sigma").get<double>();
  m.data = KqData::zeros(m.masks, coils);
  const auto kq_file = dir / "kq.arr";
  const Eigen::VectorXcd packed = to_complex_flat(load_array(kq_file));
  if (static_cast<std::size_t>(packed.size()) != m.data.sample_count()) {
    throw DataError(kq_file.string() + ": sample count does not match the masks");
  }
  Eigen::Index k = 0;
  for (auto& b : m.data.blocks) {
    b = packed.segment(k, b.size());
    k += b.size();
  }
  const auto sens_file = dir / "sens.arr";
  SensitivityMap sens{to_complex_matrix(load_array(sens_file))};
  if (sens.coils() != coils || static_cast<std::size_t>(sens.maps.cols()) != shape.voxels()) {
    throw DataError(sens_file.string() + ": does not match the acquisition");
  }
  Eigen::MatrixXcd phase;
  if (cfg.phase_mode != PhaseMode::None) {
    const auto pf = dir / (cfg.phase_estimation == PhaseEstimation::True ? "phase_true.arr" : "phase_est.arr");
    phase = to_complex_matrix(load_array(pf));
    if (phase.rows() != static_cast<Eigen::Index>(gradients) * coils || phase.cols() != s0.size()) {
      throw DataError(pf.string() + ": does not match the acquisition");
    }
  }

  const auto rec = reconstruct(cfg, s0, dirs, scheme, m, sens, phase, [&](const CycleLog& c) {
    out << "cycle " << c.cycle << ": " << c.inner_iterations << " iterations, objective " << fmt(c.objective)
        << ", change " << fmt(c.relative_change) << '\n';
  });
  save_array(dir / "s1.arr", make_array(rec.result.field.s1, "S1 fiber coefficients"));
  save_dictionary(dir, build_dictionary(scheme, dirs, TensorParams{}, {kGrayMatterDiffusivity}), scheme, dirs);
  json cycles = json::array();
  for (const auto& c : rec.result.log) {
    cycles.push_back({{"cycle", c.cycle},
                      {"inner_iterations", c.inner_iterations},
                      {"inner_converged", c.inner_converged},
                      {"objective", c.objective},
                      {"s1_l1_mass", c.s1_l1_mass},
                      {"tau", c.tau},
                      {"relative_change", c.relative_change}});
  }
  json log{{"cycles", cycles},
           {"kappa", rec.kappa},
           {"gamma", rec.result.gamma},
           {"operator_norm", rec.result.operator_norm},
           {"early_stop", rec.result.early_stop},
           {"total_iterations", rec.total_iterations},
           {"seconds", rec.seconds},
           {"phase_source", cfg.phase_mode == PhaseMode::None
                                ? "none"
                                : (cfg.phase_estimation == PhaseEstimation::True ? "true" : "estimated")}};
  {
    std::ofstream os(dir / "peaks.txt");
    write_peaks(os, rec.peaks);
  }
  write_text(dir / "solver_log.json", log.dump(2));
  out << dir.string() << ": " << rec.total_iterations << " iterations in " << fmt(rec.seconds) << " s\n";
  return true;
}

EvaluationReport cmd_evaluate(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& out) {
  const auto gt = load_ground_truth(cfg.output_dir);
  const auto est = with_file(dir / "peaks.txt", [&](std::istream& is) { return read_peaks(is, gt.shape); });
  const auto rep = evaluate(est, gt);
  const auto meta = read_json(dir / "meta.json");
  CellKey key{meta.at("q_points").get<int>(), meta.at("acceleration").get<double>(), meta.at("repetition").get<int>()};
  const CellSeeds seeds{meta.at("seeds").at("noise").get<std::uint64_t>(), meta.at("seeds").at("masks").get<std::uint64_t>()};
  int iterations = 0;
  double seconds = 0.0;
  if (fs::exists(dir / "solver_log.json")) {
    const auto log = read_json(dir / "solver_log.json");
    iterations = log.value("total_iterations", 0);
    seconds = log.value("seconds", 0.0);
  }
  write_text(dir / "report.json", report_to_json(rep));
  write_text(dir / "report.csv", csv_header() + "\n" +
                                     csv_row(cfg, key, seeds, rep.success_rate, rep.mean_angular_error, iterations,
                                             seconds, "ok") + "\n");
  out << key.id() << ": SR " << fmt(rep.success_rate) << ", mean angular error " << fmt(rep.mean_angular_error)
      << " deg\n";
  return rep;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  const auto sc = build_scenario(cfg);
  const auto runs_dir = cfg.output_dir / "sweep" / "runs";
  fs::create_directories(runs_dir);

  std::vector<CellKey> keys;
  for (int q : cfg.q_points) {
    for (double a : cfg.k_accelerations) {
      for (int r = 0; r < cfg.repeat; ++r) keys.push_back({q, a, r});
    }
  }
  std::vector<json> results(keys.size());
  std::atomic<std::size_t> next{0};
  std::mutex out_mutex;
  const int width = std::max(1, std::min({cfg.workers, thread_budget(), static_cast<int>(keys.size())}));
  const int inner_threads = width > 1 ? 1 : thread_budget();

  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      const auto& key = keys[i];
      const auto file = runs_dir / (key.id() + ".json");
      if (fs::exists(file)) {
        try {
          results[i] = json::parse(read_text(file));
          if (results[i].value("status", "") == "ok") continue;
        } catch (const std::exception&) {
        }
      }
      json r{{"q_points", key.q_points}, {"acceleration", key.acceleration}, {"repetition", key.repetition}};
      try {
        const auto res = run_cell(cfg, sc, key, {}, inner_threads);
        r["status"] = "ok";
        r["success_rate"] = res.report.success_rate;
        r["mean_angular_error"] = res.report.mean_angular_error;
        r["iterations"] = res.total_iterations;
        r["seconds"] = res.seconds;
        r["phase_agreement"] = res.phase_agreement;
        write_text(file, r.dump(2));
      } catch (const std::exception& e) {
        r["status"] = std::string("failed: ") + e.what();
      }
      results[i] = r;
      std::lock_guard lock(out_mutex);
      out << key.id() << ": " << r["status"].get<std::string>();
      if (r["status"] == "ok") {
        out << ", SR " << fmt(r["success_rate"].get<double>()) << ", error "
            << fmt(r["mean_angular_error"].get<double>()) << " deg, " << fmt(r["seconds"].get<double>()) << " s";
      }
      out << std::endl;
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < width; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int failed = 0;
  std::ostringstream runs;
  runs << csv_header() << '\n';
  struct Agg {
    std::vector<double> sr, err;
  };
  std::map<std::pair<int, double>, Agg> agg;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& r = results[i];
    const bool ok = r.value("status", "") == "ok";
    failed += ok ? 0 : 1;
    const double sr = ok ? r["success_rate"].get<double>() : NAN;
    const double err = ok ? r["mean_angular_error"].get<double>() : NAN;
    runs << csv_row(cfg, keys[i], cell_seeds(cfg, keys[i]), sr, err, r.value("iterations", 0), r.value("seconds", 0.0),
                    ok ? "ok" : "failed")
         << '\n';
    if (ok) {
      agg[{keys[i].q_points, keys[i].acceleration}].sr.push_back(sr);
      agg[{keys[i].q_points, keys[i].acceleration}].err.push_back(err);
    }
  }
  write_text(cfg.output_dir / "sweep" / "sweep_runs.csv", runs.str());

  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::pair{m, v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0};
  };
  std::ostringstream summary, sr_dat, err_dat, units_dat;
  summary << "q_points,acceleration,image_units,runs,sr_mean,sr_std,error_mean,error_std\n";
  sr_dat << "# success rate vs k-space acceleration; one block per q-point count\n";
  err_dat << "# mean angular error (deg) vs k-space acceleration; one block per q-point count\n";
  units_dat << "# image_units q_points acceleration sr_mean sr_std error_mean error_std\n";
  int last_q = -1;
  for (const auto& [k, a] : agg) {
    const auto [srm, srs] = mean_std(a.sr);
    const auto [erm, ers] = mean_std(a.err);
    const double units = image_units(k.first, k.second);
    summary << k.first << ',' << fmt(k.second) << ',' << fmt(units) << ',' << a.sr.size() << ',' << fmt(srm) << ','
            << fmt(srs) << ',' << fmt(erm) << ',' << fmt(ers) << '\n';
    if (k.first != last_q) {
      if (last_q >= 0) {
        sr_dat << "\n\n";
        err_dat << "\n\n";
      }
      // quoted block header, picked up by gnuplot's columnheader
      sr_dat << "\"" << k.first << " q-points\" sr_mean sr_std\n";
      err_dat << "\"" << k.first << " q-points\" error_mean error_std\n";
      last_q = k.first;
    }
    sr_dat << fmt(k.second) << ' ' << fmt(srm) << ' ' << fmt(srs) << '\n';
    err_dat << fmt(k.second) << ' ' << fmt(erm) << ' ' << fmt(ers) << '\n';
    units_dat << fmt(units) << ' ' << k.first << ' ' << fmt(k.second) << ' ' << fmt(srm) << ' ' << fmt(srs) << ' '
              << fmt(erm) << ' ' << fmt(ers) << '\n';
  }
  write_text(cfg.output_dir / "sweep" / "sweep_summary.csv", summary.str());
  write_text(cfg.output_dir / "sweep" / "sr_vs_acceleration.dat", sr_dat.str());
  write_text(cfg.output_dir / "sweep" / "error_vs_acceleration.dat", err_dat.str());
  write_text(cfg.output_dir / "sweep" / "sr_vs_image_units.dat", units_dat.str());
  write_text(cfg.output_dir / "sweep" / "config.json", config_to_json(cfg));
  out << keys.size() - static_cast<std::size_t>(failed) << " of " << keys.size() << " runs succeeded\n";
  return failed;
}

void cmd_masks(const ExperimentConfig& cfg, const CellKey& key, std::ostream& out) {
  const auto& shape = cfg.phantom.volume_shape;
  const auto masks = generate_masks(shape.nx, shape.ny, shape.nz, key.q_points + 1, key.acceleration,
                                    cfg.central_fraction, cell_seeds(cfg, key).masks);
  fs::create_directories(cfg.output_dir);
  save_masks(cfg.output_dir / ("masks_" + key.id()), masks, shape, cell_seeds(cfg, key).masks);
  out << "gradient  samples  factor\n";
  for (int q = 0; q < masks.gradients; ++q) {
    char line[80];
    std::snprintf(line, sizeof line, "%8d  %7zu  %6.3f\n", q, masks.count(q), undersampling_factor(masks, q));
    out << line;
  }
  out << "image units " << fmt(image_units(key.q_points, key.acceleration)) << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fodkq: fiber orientation recovery from under-sampled kq-space"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides overrides;
  CellKey key{30, 1.0, 0};
  bool force = false;
  int repeat = 0;
  std::string cell;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->allow_extras();
  };
  auto add_cell = [&](CLI::App* sub) {
    sub->add_option("--q-points", key.q_points, "diffusion gradients in the cell");
    sub->add_option("--accel", key.acceleration, "k-space acceleration");
    sub->add_option("--rep", key.repetition, "seed repetition");
  };
  auto* phantom = app.add_subcommand("phantom", "rasterize the phantom and write ground truth");
  add_common(phantom);
  auto* acquire_cmd = app.add_subcommand("acquire", "simulate one under-sampled acquisition");
  add_common(acquire_cmd);
  add_cell(acquire_cmd);
  auto* recon = app.add_subcommand("reconstruct", "recover FODs and peaks for an acquired cell");
  add_common(recon);
  add_cell(recon);
  recon->add_option("--cell", cell, "cell directory (defaults to the one named by --q-points/--accel/--rep)");
  recon->add_flag("--force", force, "recompute existing outputs");
  auto* eval = app.add_subcommand("evaluate", "score reconstructed peaks against ground truth");
  add_common(eval);
  add_cell(eval);
  eval->add_option("--cell", cell, "cell directory");
  auto* sweep = app.add_subcommand("sweep", "run the q-points x acceleration grid");
  add_common(sweep);
  sweep->add_option("--repeat", repeat, "seed repetitions per cell");
  auto* masks = app.add_subcommand("masks", "generate and summarize sampling masks");
  add_common(masks);
  add_cell(masks);
  std::string conv_in, conv_out, conv_to = "text", conv_dtype = "f64", conv_semantic;
  auto* convert = app.add_subcommand("convert", "convert arrays between binary and text");
  convert->add_option("input", conv_in, "input file")->required()->check(CLI::ExistingFile);
  convert->add_option("output", conv_out, "output file")->required();
  convert->add_option("--to", conv_to, "target format")->check(CLI::IsMember({"text", "binary"}));
  convert->add_option("--dtype", conv_dtype, "dtype of text input")->check(CLI::IsMember({"f64", "c128", "u8"}));
  convert->add_option("--semantic", conv_semantic, "semantic tag of text input");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (convert->parsed()) {
      if (conv_to == "text") {
        const auto a = load_array(conv_in);
        std::ofstream os(conv_out);
        write_array_text(os, a);
      } else {
        const auto a = with_file(conv_in, [&](std::istream& is) {
          return read_array_text(is, parse_dtype(conv_dtype), conv_semantic);
        });
        save_array(conv_out, a);
      }
      return kOk;
    }

    CLI::App* active = app.get_subcommands().front();
    const auto extras = active->remaining();
    for (std::size_t i = 0; i < extras.size(); ++i) {
      const auto& x = extras[i];
      if (x.rfind("--", 0) != 0 || x.size() < 3) {
        err << "unexpected argument '" << x << "'\n";
        return kUsage;
      }
      const auto eq = x.find('=');
      if (eq != std::string::npos) {
        overrides.emplace_back(x.substr(2, eq - 2), x.substr(eq + 1));
      } else if (i + 1 < extras.size()) {
        overrides.emplace_back(x.substr(2), extras[++i]);
      } else {
        err << "override '" << x << "' needs a value\n";
        return kUsage;
      }
    }
    auto cfg = load_config(config_path, overrides);
    if (repeat > 0) cfg.repeat = repeat;

    if (phantom->parsed()) {
      cmd_phantom(cfg, out);
    } else if (acquire_cmd->parsed()) {
      cmd_acquire(cfg, key, out);
    } else if (recon->parsed()) {
      cmd_reconstruct(cfg, cell.empty() ? cell_dir(cfg, key) : fs::path(cell), force, out);
    } else if (eval->parsed()) {
      cmd_evaluate(cfg, cell.empty() ? cell_dir(cfg, key) : fs::path(cell), out);
    } else if (sweep->parsed()) {
      return cmd_sweep(cfg, out) == 0 ? kOk : kNumericalError;
    } else if (masks->parsed()) {
      cmd_masks(cfg, key, out);
    }
    return kOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace fodkq::cli
