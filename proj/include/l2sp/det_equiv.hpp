#pragma once

#include "l2sp/finite_risk.hpp"
#include "l2sp/linalg.hpp"
#include "l2sp/task.hpp"

namespace l2sp {

/// Solved fixed-point context for the normalized Silverstein equation
///   delta = gamma * p^{-1} sum_j s_j / (tau + delta s_j).
struct DECtx {
  double gamma = 0.0;
  double tau = 0.0;
  double delta = 0.0;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  Vec spectrum;  // eigenvalues used (original order)
};

/// Unique positive solution of the normalized fixed point. Requires tau > 0,
/// or gamma > 1, or a strictly positive spectrum; throws otherwise and on
/// non-convergence.
double solve_delta(const Vec& spectrum, double gamma, double tau);

/// Same solve with diagnostics (residual, iteration count).
DECtx solve_delta_ctx(const Vec& spectrum, double gamma, double tau);

/// Positive root of gamma a^2 + tau a - 1 = 0:
/// a = (-tau + sqrt(tau^2 + 4 gamma)) / (2 gamma), in (0, 1/sqrt(gamma)].
double isotropic_a(double tau, double gamma);

/// Spectral evaluator for Q(tau) = (tau I + delta(tau) Sigma)^{-1}.
/// Diagonal Sigma keeps its given order; dense Sigma is eigendecomposed.
class Resolvent {
 public:
  Resolvent(const SpdMatrix& Sigma, double gamma, double tau);

  Vec apply(const Vec& v) const;
  Mat apply(const Mat& m) const;
  Mat dense() const;

  const Vec& q_eigenvalues() const { return q_; }
  const Vec& sigma_eigenvalues() const { return s_; }
  /// Eigenvectors of Sigma; empty for diagonal Sigma (standard basis).
  const Mat& basis() const { return v_; }
  double delta() const { return ctx_.delta; }
  double tau() const { return ctx_.tau; }
  double gamma() const { return ctx_.gamma; }
  const DECtx& ctx() const { return ctx_; }
  Index dim() const { return s_.size(); }

 private:
  DECtx ctx_;
  Vec s_;  // Sigma eigenvalues (original order when diagonal)
  Vec q_;  // 1 / (tau + delta * s_j)
  Mat v_;  // empty when Sigma is diagonal
};

inline Resolvent resolvent_q(const SpdMatrix& Sigma, double gamma, double tau) {
  return Resolvent(Sigma, gamma, tau);
}

/// Finite-p plug-in for t(tau0, tau1) = lim p^{-1} Tr(Q1 S1 Q1 (Q0 - tau0 Q0^2)).
/// Exact per-eigenvalue product when both Sigmas are diagonal.
double t_functional(const Resolvent& q0, const Resolvent& q1);

/// First-order isotropic closed-form boundary: 2 rho vs
/// gamma0 a0^2 ||w0||^2 + sigma0^2 gamma0 a0.
BoundaryVerdict isotropic_asymptotic_boundary(double w0_norm_sq, double rho,
                                              double sigma0, double gamma0,
                                              double tau0);

/// First-order deterministic equivalent of the sample resolvent
/// Ghat = n (X'X + n tau I)^{-1}, i.e. Qbar = (tau I + x Sigma)^{-1} with
/// x = 1 / (1 + gamma p^{-1} Tr(Sigma Qbar)). For tau = 0 the ridgeless
/// kernel limit R = (I + u Sigma)^{-1} is stored instead, with
/// u gamma p^{-1} Tr(Sigma R) = 1.
struct SampleDE {
  double gamma = 0.0;
  double tau = 0.0;
  bool ridgeless = false;
  double y = 0.0;   // x for tau > 0, u for tau = 0
  Vec s;            // Sigma eigenvalues (original order when diagonal)
  Vec k;            // 1/(tau + x s_j), or 1/(1 + u s_j) when ridgeless
  Mat basis;        // empty when Sigma diagonal
  int iterations = 0;
  double residual = 0.0;
};

SampleDE solve_sample_de(const SpdMatrix& Sigma, double gamma, double tau);

/// Asymptotic transfer-benefit boundary: the limit of the finite-sample
/// Monte Carlo lhs/rhs (second-order deterministic equivalents included).
/// tau0 = 0 requires sigma0 = 0 or isotropic covariances; tau = 0 on either
/// side requires the corresponding gamma > 1 (gamma0 = 1 allowed when
/// sigma0 = 0).
BoundaryVerdict asymptotic_boundary(const TaskPair& tp, double tau0,
                                    double tau1);

BoundaryVerdict asymptotic_boundary_general(const SpdMatrix& Sigma0,
                                            const SpdMatrix& Sigma1,
                                            const Vec& w0, const Vec& w1,
                                            double sigma0, double gamma0,
                                            double gamma1, double tau0,
                                            double tau1);

}  // namespace l2sp
