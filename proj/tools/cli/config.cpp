#include "config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fodkq::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void set_dotted(json& doc, const std::string& path, const std::string& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw std::invalid_argument("bad override path '" + path + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
}

double number_or_inf(const json& j) {
  if (j.is_string() && (j == "inf" || j == "infinity")) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

PhaseEstimation parse_estimation(const std::string& s) {
  if (s == "true") return PhaseEstimation::True;
  if (s == "estimated") return PhaseEstimation::Estimated;
  throw std::invalid_argument("phase_estimation must be 'true' or 'estimated'");
}

void read_solver(const json& j, SolverConfig& s, bool& kappa_explicit) {
  if (j.contains("kappa")) {
    s.kappa = number_or_inf(j["kappa"]);
    kappa_explicit = true;
  }
  s.gamma = j.value("gamma", s.gamma);
  s.inner_tol = j.value("inner_tol", s.inner_tol);
  s.inner_max_iter = j.value("inner_max_iter", s.inner_max_iter);
  s.reweight_cycles = j.value("reweight_cycles", s.reweight_cycles);
  s.reweight_tol = j.value("reweight_tol", s.reweight_tol);
  s.tau_floor = j.value("tau_floor", s.tau_floor);
  s.cone_half_angle_deg = j.value("cone_half_angle_deg", s.cone_half_angle_deg);
  s.norm_tol = j.value("norm_tol", s.norm_tol);
  s.norm_max_iter = j.value("norm_max_iter", s.norm_max_iter);
}

}  // namespace

void ExperimentConfig::validate() const {
  phantom.validate();
  if (q_points.empty() || k_accelerations.empty()) throw std::invalid_argument("empty experiment grid");
  for (int q : q_points) {
    if (q < 1 || q > full_q_points) throw std::invalid_argument("q_points must lie in [1, full_q_points]");
  }
  for (double a : k_accelerations) {
    if (!(a >= 1.0)) throw std::invalid_argument("k accelerations must be >= 1");
  }
  if (!(snr > 0.0)) throw std::invalid_argument("snr must be > 0");
  if (!(b_value > 0.0)) throw std::invalid_argument("b_value must be > 0");
  if (dictionary_size < 1) throw std::invalid_argument("dictionary_size must be >= 1");
  if (coils < 1) throw std::invalid_argument("coils must be >= 1");
  if (!(central_fraction > 0.0 && central_fraction <= 1.0)) throw std::invalid_argument("central_fraction must lie in (0, 1]");
  if (!(kappa_per_voxel > 0.0)) throw std::invalid_argument("kappa_per_voxel must be > 0");
  if (repeat < 1) throw std::invalid_argument("repeat must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  solver.validate();
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir,
                              const Overrides& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("config is not valid JSON: ") + e.what());
  }
  for (const auto& [k, v] : overrides) set_dotted(j, k, v);

  ExperimentConfig c;
  try {
    if (!j.contains("phantom")) throw std::invalid_argument("config lacks a phantom");
    const auto& ph = j["phantom"];
    if (ph.is_string()) {
      c.phantom_path = base_dir / ph.get<std::string>();
      if (!std::filesystem::exists(c.phantom_path)) throw DataError("phantom file not found: " + c.phantom_path.string());
      c.phantom = parse_phantom_spec(read_file(c.phantom_path));
    } else {
      c.phantom = parse_phantom_spec(ph.dump());
    }
    c.snr = j.contains("snr") ? number_or_inf(j["snr"]) : c.phantom.snr;
    c.phase_mode = j.contains("phase_mode") ? parse_phase_mode(j["phase_mode"].get<std::string>()) : c.phantom.phase_mode;
    if (j.contains("phase_estimation")) c.phase_estimation = parse_estimation(j["phase_estimation"].get<std::string>());
    c.q_points = j.value("q_points", c.q_points);
    c.k_accelerations = j.value("k_accelerations", c.k_accelerations);
    c.b_value = j.value("b_value", c.b_value);
    c.full_q_points = j.value("full_q_points", c.full_q_points);
    c.dictionary_size = j.value("dictionary_size", c.dictionary_size);
    c.coils = j.value("coils", c.coils);
    c.central_fraction = j.value("central_fraction", c.central_fraction);
    c.snap_to_grid = j.value("snap_to_grid", c.snap_to_grid);
    c.kappa_per_voxel = j.value("kappa_per_voxel", c.kappa_per_voxel);
    if (j.contains("solver")) read_solver(j["solver"], c.solver, c.kappa_explicit);
    if (j.contains("seeds")) {
      const auto& s = j["seeds"];
      c.seeds.phantom = s.value("phantom", c.seeds.phantom);
      c.seeds.noise = s.value("noise", c.seeds.noise);
      c.seeds.masks = s.value("masks", c.seeds.masks);
      c.seeds.directions = s.value("directions", c.seeds.directions);
    }
    c.repeat = j.value("repeat", c.repeat);
    c.workers = j.value("workers", c.workers);
    if (j.contains("output_dir")) {
      const std::filesystem::path out = j["output_dir"].get<std::string>();
      c.output_dir = out.is_absolute() ? out : base_dir / out;
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad config field: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  return parse_config(read_file(path), path.parent_path(), overrides);
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["phantom"] = json::parse(phantom_spec_to_json(c.phantom));
  j["q_points"] = c.q_points;
  j["k_accelerations"] = c.k_accelerations;
  j["snr"] = std::isinf(c.snr) ? json("inf") : json(c.snr);
  j["phase_mode"] = to_string(c.phase_mode);
  j["phase_estimation"] = c.phase_estimation == PhaseEstimation::True ? "true" : "estimated";
  j["b_value"] = c.b_value;
  j["full_q_points"] = c.full_q_points;
  j["dictionary_size"] = c.dictionary_size;
  j["coils"] = c.coils;
  j["central_fraction"] = c.central_fraction;
  j["snap_to_grid"] = c.snap_to_grid;
  j["kappa_per_voxel"] = c.kappa_per_voxel;
  const auto& s = c.solver;
  j["solver"] = {{"gamma", s.gamma},
                 {"inner_tol", s.inner_tol},
                 {"inner_max_iter", s.inner_max_iter},
                 {"reweight_cycles", s.reweight_cycles},
                 {"reweight_tol", s.reweight_tol},
                 {"tau_floor", s.tau_floor},
                 {"cone_half_angle_deg", s.cone_half_angle_deg},
                 {"norm_tol", s.norm_tol},
                 {"norm_max_iter", s.norm_max_iter}};
  if (c.kappa_explicit) j["solver"]["kappa"] = std::isinf(s.kappa) ? json("inf") : json(s.kappa);
  j["seeds"] = {{"phantom", c.seeds.phantom},
                {"noise", c.seeds.noise},
                {"masks", c.seeds.masks},
                {"directions", c.seeds.directions}};
  j["repeat"] = c.repeat;
  j["workers"] = c.workers;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2);
}

}  // namespace fodkq::cli
