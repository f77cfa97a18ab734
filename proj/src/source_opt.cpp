#include "l2sp/source_opt.hpp"

#include "l2sp/det_equiv.hpp"

#include <cmath>

namespace l2sp {

const char* to_string(PenaltyRegime r) {
  switch (r) {
    case PenaltyRegime::StrongerThanSource: return "StrongerThanSource";
    case PenaltyRegime::WeakerThanSource: return "WeakerThanSource";
    case PenaltyRegime::Coincident: return "Coincident";
  }
  return "?";
}

const char* to_string(AlignmentRegime r) {
  switch (r) {
    case AlignmentRegime::Poor: return "Poor";
    case AlignmentRegime::Strong: return "Strong";
    case AlignmentRegime::Critical: return "Critical";
  }
  return "?";
}

namespace {

void check_common(double gamma0, double w0_norm_sq) {
  if (!(gamma0 > 0.0) || !std::isfinite(gamma0)) {
    throw InvalidInput("gamma0 must be positive");
  }
  if (!(w0_norm_sq > 0.0) || !std::isfinite(w0_norm_sq)) {
    throw InvalidInput("w0_norm_sq must be positive");
  }
}

}  // namespace

double transfer_objective(double a0, double gamma0, double w0_norm_sq,
                          double rho, double sigma0) {
  check_common(gamma0, w0_norm_sq);
  const double amax = 1.0 / std::sqrt(gamma0);
  if (!(a0 > 0.0) || a0 > amax * (1.0 + 1e-12)) {
    throw InvalidInput("transfer_objective: a0 outside (0, 1/sqrt(gamma0)]");
  }
  const double a2 = a0 * a0;
  return -2.0 * gamma0 * rho * a2 + gamma0 * gamma0 * w0_norm_sq * a2 * a2 +
         sigma0 * sigma0 * gamma0 * gamma0 * a2 * a0;
}

double a0_star(double gamma0, double w0_norm_sq, double rho, double sigma0) {
  check_common(gamma0, w0_norm_sq);
  if (!(rho > 0.0)) {
    throw InvalidInput(
        "a0_star: rho must be positive (no interior optimum; do not transfer)");
  }
  if (sigma0 < 0.0) throw InvalidInput("a0_star: sigma0 < 0");
  const double s2g = 3.0 * sigma0 * sigma0 * gamma0;
  // Positive root of 4 gamma0 ||w0||^2 a^2 + 3 sigma0^2 gamma0 a - 4 rho = 0,
  // rationalized so large sigma0 does not cancel.
  const double disc = std::sqrt(s2g * s2g + 64.0 * gamma0 * w0_norm_sq * rho);
  const double root = 8.0 * rho / (s2g + disc);
  const double amax = 1.0 / std::sqrt(gamma0);
  return std::min(root, amax);
}

double tau_from_a(double a0, double gamma0) {
  if (!(gamma0 > 0.0)) throw InvalidInput("tau_from_a: gamma0 must be positive");
  const double amax = 1.0 / std::sqrt(gamma0);
  if (!(a0 > 0.0) || a0 > amax * (1.0 + 1e-9)) {
    throw InvalidInput("tau_from_a: a0 outside (0, 1/sqrt(gamma0)]");
  }
  return std::max(0.0, (1.0 - gamma0 * a0 * a0) / a0);
}

double source_optimal_tau(double gamma0, double w0_norm_sq, double sigma0) {
  check_common(gamma0, w0_norm_sq);
  if (sigma0 < 0.0) throw InvalidInput("source_optimal_tau: sigma0 < 0");
  return gamma0 * sigma0 * sigma0 / w0_norm_sq;
}

double crossover_gap(double sigma0, double gamma0, double w0_norm_sq,
                     double rho) {
  check_common(gamma0, w0_norm_sq);
  const double x = sigma0 * sigma0 * gamma0;
  return x + std::sqrt(9.0 * x * x + 64.0 * gamma0 * w0_norm_sq * rho) -
         std::sqrt(16.0 * x * x + 64.0 * gamma0 * w0_norm_sq * w0_norm_sq);
}

std::optional<double> sigma0_star(double gamma0, double w0_norm_sq,
                                  double rho) {
  check_common(gamma0, w0_norm_sq);
  if (!(rho > 0.0) || !(rho < w0_norm_sq)) {
    throw InvalidInput("sigma0_star: requires 0 < rho < ||w0||^2");
  }
  const double margin = w0_norm_sq * rho - 0.75 * w0_norm_sq * w0_norm_sq;
  if (margin <= 0.0) return std::nullopt;
  const double num = 2.0 * (w0_norm_sq * w0_norm_sq - w0_norm_sq * rho);
  const double s2 = num / std::sqrt(gamma0 * margin);
  return std::sqrt(s2);
}

SourceOptResult optimize_source(double gamma0, double w0_norm_sq, double rho,
                                double sigma0) {
  check_common(gamma0, w0_norm_sq);
  if (!(rho > 0.0)) {
    throw InvalidInput("optimize_source: rho must be positive");
  }
  if (rho > w0_norm_sq) {
    throw InvalidInput("optimize_source: requires rho <= ||w0||^2");
  }
  if (sigma0 < 0.0) throw InvalidInput("optimize_source: sigma0 < 0");

  SourceOptResult out;
  const double amax = 1.0 / std::sqrt(gamma0);
  out.a0_star = a0_star(gamma0, w0_norm_sq, rho, sigma0);
  out.clamped = out.a0_star >= amax;
  out.tau0_star = tau_from_a(out.a0_star, gamma0);
  out.tau0_source_opt = source_optimal_tau(gamma0, w0_norm_sq, sigma0);
  out.a0_source = isotropic_a(out.tau0_source_opt, gamma0);

  const double gap = out.tau0_star - out.tau0_source_opt;
  if (std::abs(gap) <= 1e-10 * std::max(1.0, out.tau0_source_opt)) {
    out.regime = PenaltyRegime::Coincident;
  } else {
    out.regime = gap > 0.0 ? PenaltyRegime::StrongerThanSource
                           : PenaltyRegime::WeakerThanSource;
  }

  const double crit = 0.75 * w0_norm_sq;
  if (std::abs(rho - crit) <= 1e-12 * w0_norm_sq) {
    out.alignment_regime = AlignmentRegime::Critical;
  } else {
    out.alignment_regime =
        rho > crit ? AlignmentRegime::Strong : AlignmentRegime::Poor;
  }
  if (rho < w0_norm_sq) {
    out.sigma0_star = sigma0_star(gamma0, w0_norm_sq, rho);
  }
  return out;
}

}  // namespace l2sp
