#include "cli_app.hpp"

#include "l2sp/config.hpp"
#include "l2sp/csv.hpp"
#include "l2sp/det_equiv.hpp"
#include "l2sp/finite_risk.hpp"
#include "l2sp/source_opt.hpp"
#include "l2sp/validate.hpp"
#include "l2sp/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace l2sp {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string format = "csv";
};

void add_common(CLI::App* sub, CommonOpts& opts, bool config_required) {
  auto* c = sub->add_option("--config", opts.config_path, "experiment config (JSON)");
  if (config_required) c->required();
  sub->add_option("--out", opts.out_dir, "directory for run records");
  sub->add_option("--seed", opts.seed, "override mc.seed");
  sub->add_option("--threads", opts.threads,
                  "worker threads (0 = hardware concurrency)");
  sub->add_option("--format", opts.format, "stdout format")
      ->check(CLI::IsMember({"csv", "json"}));
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string cell_to_csv(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  return fmt_double(v.get<double>());
}

std::string table_csv(const Table& t) {
  CsvTable c;
  c.columns = t.columns;
  for (const auto& row : t.rows) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (const auto& v : row) cells.push_back(cell_to_csv(v));
    c.rows.push_back(std::move(cells));
  }
  return c.to_string();
}

json table_json(const Table& t) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = row[i];
    arr.push_back(obj);
  }
  return arr;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

void emit(const Table& t, const CommonOpts& opts, const std::string& command,
          const json& cfg_json, const std::string& extra) {
  if (opts.format == "json") {
    std::cout << table_json(t).dump(2) << "\n";
  } else {
    std::cout << table_csv(t);
  }
  if (opts.out_dir.empty()) return;
  fs::create_directories(opts.out_dir);
  const std::string id = run_id(command, cfg_json, extra);
  {
    std::ofstream f(fs::path(opts.out_dir) / (id + ".csv"), std::ios::binary);
    f << table_csv(t);
  }
  json record{{"run_id", id},
              {"command", command},
              {"created_utc", utc_now()},
              {"version", kVersion},
              {"config", cfg_json},
              {"columns", t.columns},
              {"rows", table_json(t)}};
  if (!extra.empty()) record["mode"] = extra;
  std::ofstream f(fs::path(opts.out_dir) / (id + ".json"));
  f << record.dump(2) << "\n";
}

McOptions mc_options(const ExperimentConfig& cfg, const CommonOpts& opts) {
  if (!cfg.mc) {
    throw ConfigError("mc: section required for Monte Carlo commands");
  }
  McOptions mc;
  mc.replicates = cfg.mc->replicates;
  mc.seed = opts.seed.value_or(cfg.mc->seed);
  mc.threads = opts.threads;
  return mc;
}

const SweepSpec& require_sweep(const ExperimentConfig& cfg) {
  if (!cfg.sweep) {
    throw ConfigError("sweep: section required (a single point is a one-element grid)");
  }
  return *cfg.sweep;
}

// ---- simulate ----

int cmd_simulate(const CommonOpts& opts) {
  const ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  const SweepSpec& sw = require_sweep(cfg);
  if (sw.axis2) {
    throw ConfigError("sweep.axis2: simulate supports a single axis");
  }
  const McOptions mc = mc_options(cfg, opts);

  Table t;
  t.columns = {"grid_value", "scratch_risk", "transfer_risk", "delta",
               "stderr",     "B",            "V0_term",       "V1_term"};

  if (sw.axis == SweepAxis::Tau0) {
    // Common random designs across the penalty grid.
    const PointParams pt = apply_axis(cfg, sw.axis, sw.grid.front());
    const TaskPair tp = build_task(pt.task);
    std::vector<double> lambda0s;
    for (double v : sw.grid) {
      if (v < 0) throw ConfigError("sweep.grid: tau0 must be >= 0");
      lambda0s.push_back(v * static_cast<double>(tp.n0()));
    }
    const auto reports = mc_expected_risk_lambda0_sweep(
        tp, lambda0s, pt.tau1 * static_cast<double>(tp.n1()), mc);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      t.rows.push_back({sw.grid[i], r.scratch_risk, r.transfer_risk, r.delta,
                        r.mc_stderr, r.transfer_bias, r.transfer_var_source,
                        r.transfer_var_target});
    }
  } else {
    for (double v : sw.grid) {
      const PointParams pt = apply_axis(cfg, sw.axis, v);
      const TaskPair tp = build_task(pt.task);
      const RiskReport r = mc_expected_risk(
          tp, pt.tau0 * static_cast<double>(tp.n0()),
          pt.tau1 * static_cast<double>(tp.n1()), mc);
      t.rows.push_back({v, r.scratch_risk, r.transfer_risk, r.delta,
                        r.mc_stderr, r.transfer_bias, r.transfer_var_source,
                        r.transfer_var_target});
    }
  }
  emit(t, opts, "simulate", cfg.to_json(), "");
  return 0;
}

// ---- boundary ----

BoundaryVerdict boundary_point(const std::string& criterion,
                               const ExperimentConfig& cfg,
                               const PointParams& pt, SweepAxis axis,
                               double value, const CommonOpts& opts) {
  if (criterion == "finite") {
    const TaskPair tp = build_task(pt.task);
    return finite_boundary(tp, pt.tau0 * static_cast<double>(tp.n0()),
                           pt.tau1 * static_cast<double>(tp.n1()),
                           mc_options(cfg, opts));
  }
  if (criterion == "finite-isotropic") {
    return isotropic_ridgeless_boundary(pt.task.w0_norm_sq, pt.task.rho,
                                        pt.task.sigma0, pt.task.n0, pt.task.p);
  }
  if (criterion == "asymptotic") {
    const TaskPair tp = build_task(pt.task);
    return asymptotic_boundary(tp, pt.tau0, pt.tau1);
  }
  // asymptotic-isotropic
  const double gamma0 = axis == SweepAxis::Gamma0
                            ? value
                            : static_cast<double>(pt.task.p) / pt.task.n0;
  return isotropic_asymptotic_boundary(pt.task.w0_norm_sq, pt.task.rho,
                                       pt.task.sigma0, gamma0, pt.tau0);
}

int cmd_boundary(const CommonOpts& opts, const std::string& criterion) {
  const ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  const SweepSpec& sw = require_sweep(cfg);

  const bool isotropic_required =
      criterion == "finite-isotropic" || criterion == "asymptotic-isotropic";
  if (isotropic_required && !cfg.task.isotropic()) {
    throw ConfigError("boundary: criterion '" + criterion +
                      "' requires an isotropic task (no explicit spectra)");
  }
  if (criterion == "finite-isotropic") {
    if (cfg.tau0() != 0.0 || cfg.tau1() != 0.0 ||
        sw.axis == SweepAxis::Tau0 || sw.axis == SweepAxis::Tau1 ||
        (sw.axis2 && (*sw.axis2 == SweepAxis::Tau0 || *sw.axis2 == SweepAxis::Tau1))) {
      throw ConfigError(
          "boundary: finite-isotropic is the ridgeless criterion; penalties "
          "must be zero and not swept");
    }
  }

  Table t;
  if (sw.axis2) {
    t.columns = {"grid_value", "grid_value2", "lhs", "rhs", "beneficial"};
    for (double v1 : sw.grid) {
      for (double v2 : sw.grid2) {
        ExperimentConfig local = cfg;
        const PointParams p1 = apply_axis(local, sw.axis, v1);
        local.task = p1.task;
        if (local.uses_tau) {
          local.pen0 = p1.tau0;
          local.pen1 = p1.tau1;
        } else {
          local.pen0 = p1.tau0 * static_cast<double>(p1.task.n0);
          local.pen1 = p1.tau1 * static_cast<double>(p1.task.n1);
        }
        const PointParams pt = apply_axis(local, *sw.axis2, v2);
        const BoundaryVerdict bv =
            boundary_point(criterion, cfg, pt, *sw.axis2, v2, opts);
        t.rows.push_back({v1, v2, bv.lhs, bv.rhs, bv.transfer_beneficial});
      }
    }
  } else {
    t.columns = {"grid_value", "lhs", "rhs", "beneficial"};
    for (double v : sw.grid) {
      const PointParams pt = apply_axis(cfg, sw.axis, v);
      const BoundaryVerdict bv = boundary_point(criterion, cfg, pt, sw.axis, v, opts);
      t.rows.push_back({v, bv.lhs, bv.rhs, bv.transfer_beneficial});
    }
  }
  emit(t, opts, "boundary", cfg.to_json(), criterion);
  return 0;
}

// ---- optimize-source ----

int cmd_optimize_source(const CommonOpts& opts) {
  const ExperimentConfig cfg = ExperimentConfig::parse_file(opts.config_path);
  const SweepSpec& sw = require_sweep(cfg);
  if (!cfg.task.isotropic()) {
    throw ConfigError("optimize-source: requires an isotropic task");
  }
  if (sw.axis2) {
    throw ConfigError("sweep.axis2: optimize-source supports a single axis");
  }

  Table t;
  t.columns = {"grid_value",       "a0_star",     "tau0_star",
               "tau0_source_opt",  "sigma0_star", "regime"};
  for (double v : sw.grid) {
    const PointParams pt = apply_axis(cfg, sw.axis, v);
    const double rho = pt.task.rho;
    if (!(rho > 0.0)) {
      std::cerr << "optimize-source: no positive-alignment optimum (rho <= 0)\n";
      return 1;
    }
    const double gamma0 = sw.axis == SweepAxis::Gamma0
                              ? v
                              : static_cast<double>(pt.task.p) / pt.task.n0;
    const SourceOptResult res =
        optimize_source(gamma0, pt.task.w0_norm_sq, rho, pt.task.sigma0);
    t.rows.push_back({v, res.a0_star, res.tau0_star, res.tau0_source_opt,
                      res.sigma0_star ? json(*res.sigma0_star) : json(nullptr),
                      to_string(res.regime)});
  }
  emit(t, opts, "optimize-source", cfg.to_json(), "");
  return 0;
}

// ---- fixed-point ----

int cmd_fixed_point(const CommonOpts& opts, double gamma,
                    const std::string& taus_arg, const std::string& tau_grid,
                    const std::string& spectrum_file) {
  std::vector<double> taus;
  if (!taus_arg.empty()) {
    std::stringstream ss(taus_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      taus.push_back(std::stod(item));
    }
  } else if (!tau_grid.empty()) {
    double lo, hi;
    int count;
    if (std::sscanf(tau_grid.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 ||
        count < 2 || lo <= 0 || hi <= lo) {
      throw InvalidInput("--tau-grid: expected LO:HI:COUNT with 0 < LO < HI");
    }
    for (int i = 0; i < count; ++i) {
      taus.push_back(std::exp(std::log(lo) +
                              (std::log(hi) - std::log(lo)) * i / (count - 1)));
    }
  } else {
    throw InvalidInput("fixed-point: provide --taus or --tau-grid");
  }

  bool isotropic = spectrum_file.empty();
  Vec spectrum;
  if (isotropic) {
    spectrum = Vec::Ones(16);
  } else {
    std::ifstream f(spectrum_file);
    if (!f) throw InvalidInput("--spectrum: cannot open '" + spectrum_file + "'");
    std::vector<double> vals;
    double v;
    while (f >> v) vals.push_back(v);
    if (vals.empty()) throw InvalidInput("--spectrum: no eigenvalues found");
    spectrum = Eigen::Map<Vec>(vals.data(), static_cast<Index>(vals.size()));
  }

  Table t;
  t.columns = {"tau", "delta", "residual", "iterations", "converged"};
  if (isotropic) {
    t.columns.push_back("a0");
    t.columns.push_back("abs_delta_minus_gamma_a0");
  }
  bool all_converged = true;
  for (double tau : taus) {
    const DECtx ctx = solve_delta_ctx(spectrum, gamma, tau);
    all_converged = all_converged && ctx.converged;
    std::vector<json> row{tau, ctx.delta, ctx.residual, ctx.iterations,
                          ctx.converged};
    if (isotropic) {
      const double a = isotropic_a(tau, gamma);
      row.push_back(a);
      row.push_back(std::abs(ctx.delta - gamma * a));
    }
    t.rows.push_back(std::move(row));
  }
  json cfg{{"gamma", gamma},
           {"taus", taus},
           {"spectrum", isotropic ? json("isotropic") : json(spectrum_file)}};
  emit(t, opts, "fixed-point", cfg, "");
  return all_converged ? 0 : 1;
}

// ---- validate ----

int cmd_validate(const CommonOpts& opts, const std::string& preset_name) {
  const Preset preset = preset_name == "full" ? Preset::Full : Preset::Quick;
  const std::uint64_t seed = opts.seed.value_or(42);
  const auto results = run_validation(preset, seed, opts.threads);
  for (const auto& r : results) {
    std::printf("[%s] %-26s measured=%-12.6g tol=%-8g %s (%.2fs)\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), r.measured,
                r.tolerance, r.cmp.c_str(), r.seconds);
  }
  const bool ok = all_pass(results);
  std::printf("%s: %zu criteria, %s\n", to_string(preset), results.size(),
              ok ? "all passed" : "FAILURES present");
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    {
      std::ofstream f(fs::path(opts.out_dir) / "report.csv", std::ios::binary);
      f << render_report_csv(results);
    }
    std::ofstream f(fs::path(opts.out_dir) / "report.json");
    f << render_report_json(results, preset, seed).dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int cli_run(int argc, const char* const* argv) {
  CLI::App app{"L2-SP ridge transfer risk toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts sim_opts, bnd_opts, src_opts, fp_opts, val_opts;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo risk sweep");
  add_common(sim, sim_opts, true);

  auto* bnd = app.add_subcommand("boundary", "transfer-benefit boundary sweep");
  add_common(bnd, bnd_opts, true);
  std::string criterion;
  bnd->add_option("--criterion", criterion, "boundary criterion")
      ->required()
      ->check(CLI::IsMember(
          {"finite", "finite-isotropic", "asymptotic", "asymptotic-isotropic"}));

  auto* src = app.add_subcommand("optimize-source",
                                 "transfer-optimal source penalty sweep");
  add_common(src, src_opts, true);

  auto* fp = app.add_subcommand("fixed-point", "Silverstein fixed-point diagnostics");
  add_common(fp, fp_opts, false);
  double gamma = 0.0;
  std::string taus_arg, tau_grid, spectrum_file;
  fp->add_option("--gamma", gamma, "aspect ratio p/n")->required();
  fp->add_option("--taus", taus_arg, "comma-separated tau values");
  fp->add_option("--tau-grid", tau_grid, "log grid LO:HI:COUNT");
  fp->add_option("--spectrum", spectrum_file,
                 "file with one eigenvalue per line (default isotropic)");

  auto* val = app.add_subcommand("validate", "run the acceptance criteria");
  add_common(val, val_opts, false);
  std::string preset = "quick";
  val->add_option("--preset", preset, "budget preset")
      ->check(CLI::IsMember({"quick", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (bnd->parsed()) return cmd_boundary(bnd_opts, criterion);
    if (src->parsed()) return cmd_optimize_source(src_opts);
    if (fp->parsed())
      return cmd_fixed_point(fp_opts, gamma, taus_arg, tau_grid, spectrum_file);
    if (val->parsed()) return cmd_validate(val_opts, preset);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace l2sp
