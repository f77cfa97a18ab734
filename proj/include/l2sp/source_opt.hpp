#pragma once

#include "l2sp/linalg.hpp"

#include <optional>

namespace l2sp {

enum class PenaltyRegime { StrongerThanSource, WeakerThanSource, Coincident };
enum class AlignmentRegime { Poor, Strong, Critical };

const char* to_string(PenaltyRegime r);
const char* to_string(AlignmentRegime r);

struct SourceOptResult {
  double a0_star = 0.0;          // transfer-optimal resolvent scalar
  double tau0_star = 0.0;        // transfer-optimal source penalty
  double tau0_source_opt = 0.0;  // source-task-optimal penalty gamma0 sigma0^2 / ||w0||^2
  double a0_source = 0.0;        // isotropic_a(tau0_source_opt, gamma0)
  PenaltyRegime regime = PenaltyRegime::Coincident;
  std::optional<double> sigma0_star;  // present iff rho > (3/4) ||w0||^2
  AlignmentRegime alignment_regime = AlignmentRegime::Poor;
  bool clamped = false;  // a0_star hit the feasible boundary 1/sqrt(gamma0)
};

/// f(a0) = -2 gamma0 rho a0^2 + gamma0^2 ||w0||^2 a0^4 + sigma0^2 gamma0^2 a0^3.
/// The tau0-dependent part of the asymptotic transfer risk; the full profile
/// is ||w1||^2 + f(a0).
double transfer_objective(double a0, double gamma0, double w0_norm_sq,
                          double rho, double sigma0);

/// Unique root of f'(a0) = 0 in (0, 1/sqrt(gamma0)], clamped to the feasible
/// interval when rho > ||w0||^2 pushes it outside. Requires rho > 0.
double a0_star(double gamma0, double w0_norm_sq, double rho, double sigma0);

/// Inverse of a0(tau): tau = (1 - gamma a0^2) / a0, for a0 in (0, 1/sqrt(gamma)].
double tau_from_a(double a0, double gamma0);

/// Source-task-optimal penalty gamma0 sigma0^2 / ||w0||^2.
double source_optimal_tau(double gamma0, double w0_norm_sq, double sigma0);

/// Crossover function of the noise threshold: negative means the transfer
/// optimum needs stronger-than-source regularization at this sigma0.
double crossover_gap(double sigma0, double gamma0, double w0_norm_sq,
                     double rho);

/// Noise threshold sigma0* (as a std deviation); present iff
/// rho > (3/4) ||w0||^2. Requires 0 < rho < ||w0||^2.
std::optional<double> sigma0_star(double gamma0, double w0_norm_sq, double rho);

SourceOptResult optimize_source(double gamma0, double w0_norm_sq, double rho,
                                double sigma0);

}  // namespace l2sp
