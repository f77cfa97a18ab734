#pragma once

#include "l2sp/linalg.hpp"
#include "l2sp/task.hpp"

#include <cstdint>
#include <vector>

namespace l2sp {

enum class BoundaryCriterion {
  FiniteGeneral,
  FiniteIsotropicRidgeless,
  Asymptotic,
  AsymptoticIsotropic,
};

const char* to_string(BoundaryCriterion c);

/// One side-by-side evaluation of a transfer-benefit criterion.
/// transfer_beneficial is the strict comparison lhs > rhs; equality counts
/// as not beneficial. lhs/rhs_stderr are zero for closed forms.
struct BoundaryVerdict {
  double lhs = 0.0;
  double rhs = 0.0;
  bool transfer_beneficial = false;
  BoundaryCriterion criterion = BoundaryCriterion::FiniteGeneral;
  double lhs_stderr = 0.0;
  double rhs_stderr = 0.0;
};

/// Conditional-on-design risk integrands (expectation over noise done
/// analytically). Risk scale: transfer risk = transfer_bias
/// + sigma0^2 * var_source_coeff + sigma1^2 * var_target_coeff.
struct ConditionalRiskTerms {
  double transfer_bias = 0.0;      // B
  double var_source_coeff = 0.0;   // V0
  double var_target_coeff = 0.0;   // V1
  double scratch_bias = 0.0;
  double scratch_var_coeff = 0.0;  // same integrand as V1; kept for the report
  double cross = 0.0;              // <G1 A0 w0, G1 w1>_{Sigma1}
  double prior_norm_sq = 0.0;      // ||G1 A0 w0||^2_{Sigma1}
};

/// Exact noise-integrated risk terms for the given designs.
/// lambda_i = 0 is routed through the pseudo-inverse forms
/// (M0 X0' -> X0^+, lambda1 M1 -> I - P1), not a small-lambda substitute.
ConditionalRiskTerms conditional_risk_terms(const Mat& X0, const Mat& X1,
                                            const TaskPair& tp, double lambda0,
                                            double lambda1);

struct McOptions {
  std::int64_t replicates = 1000;
  std::uint64_t seed = 0;
  int threads = 1;  // <= 1 means run inline
  EntryDistribution dist = EntryDistribution::Gaussian;
};

struct RiskReport {
  double scratch_risk = 0.0;
  double transfer_risk = 0.0;
  double transfer_bias = 0.0;        // B
  double transfer_var_source = 0.0;  // sigma0^2 V0
  double transfer_var_target = 0.0;  // sigma1^2 V1
  double delta = 0.0;                // scratch - transfer
  std::int64_t mc_replicates = 0;
  double mc_stderr = 0.0;            // standard error of delta
};

/// Monte Carlo expectation over designs of the conditional risk terms.
RiskReport mc_expected_risk(const TaskPair& tp, double lambda0, double lambda1,
                            const McOptions& opts);

/// Same, sweeping lambda0 over a grid with common random designs per
/// replicate (the per-replicate Gram work is shared across the grid).
std::vector<RiskReport> mc_expected_risk_lambda0_sweep(
    const TaskPair& tp, const std::vector<double>& lambda0s, double lambda1,
    const McOptions& opts);

/// Finite-sample transfer-benefit boundary by Monte Carlo.
/// For lambda1 > 0 the reported lhs/rhs are in n1*M1 units (the canceled
/// benefit-inequality quantities divided by tau1^2), which is the scale that converges
/// to the asymptotic boundary values; for lambda1 = 0 they are in (I - P1)
/// units. The verdict is invariant to this scaling.
BoundaryVerdict finite_boundary(const TaskPair& tp, double lambda0,
                                double lambda1, const McOptions& opts);

/// Closed-form isotropic ridgeless boundary:
/// lhs = 2 rho, rhs = ||w0||^2 + sigma0^2 * p / (p - n0 - 1).
BoundaryVerdict isotropic_ridgeless_boundary(double w0_norm_sq, double rho,
                                             double sigma0, Index n0, Index p);

}  // namespace l2sp
