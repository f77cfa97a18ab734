#include "l2sp/config.hpp"

#include "l2sp/version.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace l2sp {

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::Rho: return "rho";
    case SweepAxis::Sigma0: return "sigma0";
    case SweepAxis::Tau0: return "tau0";
    case SweepAxis::Gamma0: return "gamma0";
    case SweepAxis::N1: return "n1";
    case SweepAxis::Sigma1: return "sigma1";
    case SweepAxis::Tau1: return "tau1";
  }
  return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "rho") return SweepAxis::Rho;
  if (s == "sigma0") return SweepAxis::Sigma0;
  if (s == "tau0") return SweepAxis::Tau0;
  if (s == "gamma0") return SweepAxis::Gamma0;
  if (s == "n1") return SweepAxis::N1;
  if (s == "sigma1") return SweepAxis::Sigma1;
  if (s == "tau1") return SweepAxis::Tau1;
  throw ConfigError("sweep.axis: unknown axis '" + s + "'");
}

namespace {

using nlohmann::json;

const json& require_field(const json& j, const char* ctx, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(std::string(ctx) + "." + key + ": missing field");
  }
  return *it;
}

double get_number(const json& j, const char* ctx, const char* key) {
  const json& v = require_field(j, ctx, key);
  if (!v.is_number()) {
    throw ConfigError(std::string(ctx) + "." + key + ": expected a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ConfigError(std::string(ctx) + "." + key + ": must be finite");
  }
  return d;
}

Index get_count(const json& j, const char* ctx, const char* key) {
  const double d = get_number(j, ctx, key);
  if (d < 1 || d != std::floor(d)) {
    throw ConfigError(std::string(ctx) + "." + key +
                      ": expected a positive integer");
  }
  return static_cast<Index>(d);
}

std::vector<double> get_grid(const json& v, const char* name) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError(std::string(name) + ": expected a non-empty array");
  }
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw ConfigError(std::string(name) + ": entries must be finite numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;

  const json& sv = require_field(j, "config", "schema_version");
  if (!sv.is_string() || sv.get<std::string>() != "1") {
    throw ConfigError("config.schema_version: expected \"1\"");
  }
  cfg.schema_version = "1";

  const json& jt = require_field(j, "config", "task");
  cfg.task.p = get_count(jt, "task", "p");
  cfg.task.n0 = get_count(jt, "task", "n0");
  cfg.task.n1 = get_count(jt, "task", "n1");
  cfg.task.w0_norm_sq = get_number(jt, "task", "w0_norm_sq");
  cfg.task.rho = get_number(jt, "task", "rho");
  cfg.task.w1_norm_sq = get_number(jt, "task", "w1_norm_sq");
  cfg.task.sigma0 = get_number(jt, "task", "sigma0");
  cfg.task.sigma1 = get_number(jt, "task", "sigma1");
  if (cfg.task.w0_norm_sq < 0 || cfg.task.w1_norm_sq < 0) {
    throw ConfigError("task.w*_norm_sq: must be nonnegative");
  }
  if (cfg.task.sigma0 < 0 || cfg.task.sigma1 < 0) {
    throw ConfigError("task.sigma*: must be nonnegative");
  }
  if (cfg.task.n0 >= cfg.task.p - 1 || cfg.task.n1 >= cfg.task.p - 1) {
    throw ConfigError("task: overparameterization requires n0, n1 < p - 1");
  }
  for (const char* key : {"spectrum0", "spectrum1"}) {
    if (jt.contains(key)) {
      auto spec = get_grid(jt.at(key), (std::string("task.") + key).c_str());
      if (static_cast<Index>(spec.size()) != cfg.task.p) {
        throw ConfigError(std::string("task.") + key +
                          ": length must equal p");
      }
      for (double s : spec) {
        if (s < 0) {
          throw ConfigError(std::string("task.") + key +
                            ": eigenvalues must be nonnegative");
        }
      }
      if (std::string(key) == "spectrum0") cfg.task.spectrum0 = std::move(spec);
      else cfg.task.spectrum1 = std::move(spec);
    }
  }
  if (cfg.task.spectrum0.has_value() != cfg.task.spectrum1.has_value()) {
    throw ConfigError("task: provide both spectrum0 and spectrum1 or neither");
  }

  const json& jp = require_field(j, "config", "penalties");
  const bool has_tau = jp.contains("tau0") || jp.contains("tau1");
  const bool has_lambda = jp.contains("lambda0") || jp.contains("lambda1");
  if (has_tau == has_lambda) {
    throw ConfigError(
        "penalties: exactly one of the (tau0, tau1) / (lambda0, lambda1) "
        "conventions must be used");
  }
  cfg.uses_tau = has_tau;
  if (has_tau) {
    cfg.pen0 = get_number(jp, "penalties", "tau0");
    cfg.pen1 = get_number(jp, "penalties", "tau1");
  } else {
    cfg.pen0 = get_number(jp, "penalties", "lambda0");
    cfg.pen1 = get_number(jp, "penalties", "lambda1");
  }
  if (cfg.pen0 < 0 || cfg.pen1 < 0) {
    throw ConfigError("penalties: must be nonnegative");
  }

  if (j.contains("mc")) {
    const json& jm = j.at("mc");
    McSpec mc;
    const double reps = get_number(jm, "mc", "replicates");
    if (reps < 2 || reps != std::floor(reps)) {
      throw ConfigError("mc.replicates: must be an integer >= 2");
    }
    mc.replicates = static_cast<std::int64_t>(reps);
    const double seed = get_number(jm, "mc", "seed");
    if (seed < 0 || seed != std::floor(seed)) {
      throw ConfigError("mc.seed: must be a nonnegative integer");
    }
    mc.seed = static_cast<std::uint64_t>(seed);
    cfg.mc = mc;
  }

  if (j.contains("sweep")) {
    const json& js = j.at("sweep");
    SweepSpec sw;
    const json& ax = require_field(js, "sweep", "axis");
    if (!ax.is_string()) throw ConfigError("sweep.axis: expected a string");
    sw.axis = sweep_axis_from_string(ax.get<std::string>());
    sw.grid = get_grid(require_field(js, "sweep", "grid"), "sweep.grid");
    if (js.contains("axis2") || js.contains("grid2")) {
      const json& ax2 = require_field(js, "sweep", "axis2");
      if (!ax2.is_string()) throw ConfigError("sweep.axis2: expected a string");
      sw.axis2 = sweep_axis_from_string(ax2.get<std::string>());
      sw.grid2 = get_grid(require_field(js, "sweep", "grid2"), "sweep.grid2");
      if (*sw.axis2 == sw.axis) {
        throw ConfigError("sweep.axis2: must differ from sweep.axis");
      }
    }
    cfg.sweep = sw;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: JSON parse error in '" + path + "': " + e.what());
  }
  return parse(j);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  nlohmann::json jt;
  jt["p"] = task.p;
  jt["n0"] = task.n0;
  jt["n1"] = task.n1;
  jt["w0_norm_sq"] = task.w0_norm_sq;
  jt["rho"] = task.rho;
  jt["w1_norm_sq"] = task.w1_norm_sq;
  jt["sigma0"] = task.sigma0;
  jt["sigma1"] = task.sigma1;
  if (task.spectrum0) jt["spectrum0"] = *task.spectrum0;
  if (task.spectrum1) jt["spectrum1"] = *task.spectrum1;
  j["task"] = jt;
  nlohmann::json jp;
  if (uses_tau) {
    jp["tau0"] = pen0;
    jp["tau1"] = pen1;
  } else {
    jp["lambda0"] = pen0;
    jp["lambda1"] = pen1;
  }
  j["penalties"] = jp;
  if (mc) {
    j["mc"] = {{"replicates", mc->replicates}, {"seed", mc->seed}};
  }
  if (sweep) {
    nlohmann::json js;
    js["axis"] = to_string(sweep->axis);
    js["grid"] = sweep->grid;
    if (sweep->axis2) {
      js["axis2"] = to_string(*sweep->axis2);
      js["grid2"] = sweep->grid2;
    }
    j["sweep"] = js;
  }
  return j;
}

PointParams apply_axis(const ExperimentConfig& cfg, SweepAxis axis,
                       double value) {
  PointParams pt;
  pt.task = cfg.task;
  pt.tau0 = cfg.tau0();
  pt.tau1 = cfg.tau1();
  switch (axis) {
    case SweepAxis::Rho:
      pt.task.rho = value;
      break;
    case SweepAxis::Sigma0:
      if (value < 0) throw ConfigError("sweep.grid: sigma0 must be >= 0");
      pt.task.sigma0 = value;
      break;
    case SweepAxis::Sigma1:
      if (value < 0) throw ConfigError("sweep.grid: sigma1 must be >= 0");
      pt.task.sigma1 = value;
      break;
    case SweepAxis::Tau0:
      if (value < 0) throw ConfigError("sweep.grid: tau0 must be >= 0");
      pt.tau0 = value;
      break;
    case SweepAxis::Tau1:
      if (value < 0) throw ConfigError("sweep.grid: tau1 must be >= 0");
      pt.tau1 = value;
      break;
    case SweepAxis::Gamma0: {
      if (value <= 1.0) {
        throw ConfigError("sweep.grid: gamma0 must exceed 1 (n0 < p)");
      }
      const Index n0 =
          std::max<Index>(1, static_cast<Index>(std::llround(
                                 static_cast<double>(pt.task.p) / value)));
      if (n0 >= pt.task.p - 1) {
        throw ConfigError("sweep.grid: gamma0 implies n0 >= p - 1");
      }
      pt.task.n0 = n0;
      break;
    }
    case SweepAxis::N1: {
      if (value < 1 || value != std::floor(value)) {
        throw ConfigError("sweep.grid: n1 must be a positive integer");
      }
      const Index n1 = static_cast<Index>(value);
      if (n1 >= pt.task.p - 1) {
        throw ConfigError("sweep.grid: n1 must be < p - 1");
      }
      pt.task.n1 = n1;
      break;
    }
  }
  return pt;
}

TaskPair build_task(const TaskSpec& ts) {
  const double w0n = std::sqrt(ts.w0_norm_sq);
  const double w1n = std::sqrt(ts.w1_norm_sq);
  if (ts.isotropic()) {
    return TaskPair::isotropic(ts.p, ts.n0, ts.n1, w0n, ts.rho, w1n, ts.sigma0,
                               ts.sigma1);
  }
  Vec s0 = Eigen::Map<const Vec>(ts.spectrum0->data(),
                                 static_cast<Index>(ts.spectrum0->size()));
  Vec s1 = Eigen::Map<const Vec>(ts.spectrum1->data(),
                                 static_cast<Index>(ts.spectrum1->size()));
  return TaskPair::with_spectra(ts.p, ts.n0, ts.n1, s0, s1, w0n, ts.rho, w1n,
                                ts.sigma0, ts.sigma1);
}

std::string run_id(const std::string& command, const nlohmann::json& config,
                   const std::string& extra) {
  const std::string payload =
      command + '\n' + config.dump() + '\n' + kVersion + '\n' + extra;
  // FNV-1a 64-bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : payload) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace l2sp
