#pragma once

#include "l2sp/linalg.hpp"
#include "l2sp/task.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace l2sp {

/// Config/validation failure; the CLI maps this to exit code 2.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

enum class SweepAxis { Rho, Sigma0, Tau0, Gamma0, N1, Sigma1, Tau1 };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct TaskSpec {
  Index p = 0;
  Index n0 = 0;
  Index n1 = 0;
  double w0_norm_sq = 1.0;
  double rho = 0.0;
  double w1_norm_sq = 1.0;
  double sigma0 = 0.0;
  double sigma1 = 0.0;
  std::optional<std::vector<double>> spectrum0;
  std::optional<std::vector<double>> spectrum1;

  bool isotropic() const { return !spectrum0 && !spectrum1; }
  bool operator==(const TaskSpec&) const = default;
};

struct McSpec {
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  bool operator==(const McSpec&) const = default;
};

struct SweepSpec {
  SweepAxis axis = SweepAxis::Rho;
  std::vector<double> grid;
  std::optional<SweepAxis> axis2;
  std::vector<double> grid2;
  bool operator==(const SweepSpec&) const = default;
};

/// Parsed experiment config. Penalties are stored in the convention the file
/// used (round-trip identity); tau is the canonical internal form with
/// lambda_i = n_i * tau_i.
struct ExperimentConfig {
  std::string schema_version = "1";
  TaskSpec task;
  bool uses_tau = true;
  double pen0 = 0.0;  // tau0 or lambda0 as given
  double pen1 = 0.0;
  std::optional<McSpec> mc;
  std::optional<SweepSpec> sweep;

  double tau0() const { return uses_tau ? pen0 : pen0 / static_cast<double>(task.n0); }
  double tau1() const { return uses_tau ? pen1 : pen1 / static_cast<double>(task.n1); }
  double lambda0() const { return uses_tau ? pen0 * static_cast<double>(task.n0) : pen0; }
  double lambda1() const { return uses_tau ? pen1 * static_cast<double>(task.n1) : pen1; }

  static ExperimentConfig parse(const nlohmann::json& j);
  static ExperimentConfig parse_file(const std::string& path);
  nlohmann::json to_json() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Concrete parameters for one grid point of a sweep.
struct PointParams {
  TaskSpec task;
  double tau0 = 0.0;
  double tau1 = 0.0;
};

/// Apply one sweep value to the base config. Gamma0 adjusts n0 = round(p /
/// gamma0); N1 must be a positive integer below p - 1.
PointParams apply_axis(const ExperimentConfig& cfg, SweepAxis axis,
                       double value);

/// Build the TaskPair for a point (isotropic or diagonal spectra).
TaskPair build_task(const TaskSpec& ts);

/// Content hash of (command, canonical config, code version): stable across
/// reruns of identical inputs.
std::string run_id(const std::string& command, const nlohmann::json& config,
                   const std::string& extra = "");

}  // namespace l2sp
