#pragma once

#include "l2sp/linalg.hpp"

#include <cstdint>

namespace l2sp {

enum class EntryDistribution { Gaussian, Rademacher };

struct AlignmentSummary {
  double rho;         // <w0, w1>
  double w0_norm_sq;
  double w1_norm_sq;
};

/// A full transfer problem instance: dimensions, covariances, signals, noise
/// levels. Overparameterized by construction (n0, n1 < p - 1).
class TaskPair {
 public:
  /// Sigma0 = Sigma1 = I. w0 is a fixed deterministic unit direction scaled
  /// to w0_norm; w1 lies in the span of w0 and one fixed orthogonal
  /// direction with <w0,w1> = rho and ||w1|| = w1_norm exactly.
  static TaskPair isotropic(Index p, Index n0, Index n1, double w0_norm,
                            double rho, double w1_norm, double sigma0,
                            double sigma1);

  /// Diagonal Sigma_i from eigenvalue lists; same deterministic w frame.
  static TaskPair with_spectra(Index p, Index n0, Index n1, const Vec& spectrum0,
                               const Vec& spectrum1, double w0_norm, double rho,
                               double w1_norm, double sigma0, double sigma1);

  Index p() const { return p_; }
  Index n0() const { return n0_; }
  Index n1() const { return n1_; }
  double sigma0() const { return sigma0_; }
  double sigma1() const { return sigma1_; }
  const SpdMatrix& Sigma0() const { return Sigma0_; }
  const SpdMatrix& Sigma1() const { return Sigma1_; }
  const Vec& w0() const { return w0_; }
  const Vec& w1() const { return w1_; }

  double gamma0() const { return static_cast<double>(p_) / n0_; }
  double gamma1() const { return static_cast<double>(p_) / n1_; }

  /// Sigma_i^{1/2}; empty matrix when Sigma_i is the identity.
  const Mat& sqrt_Sigma0() const { return sqrt0_; }
  const Mat& sqrt_Sigma1() const { return sqrt1_; }

 private:
  TaskPair(Index p, Index n0, Index n1, SpdMatrix S0, SpdMatrix S1, Vec w0,
           Vec w1, double sigma0, double sigma1);

  Index p_, n0_, n1_;
  double sigma0_, sigma1_;
  SpdMatrix Sigma0_, Sigma1_;
  Vec w0_, w1_;
  Mat sqrt0_, sqrt1_;
};

/// One Monte Carlo draw of the data model: X_i = Z_i Sigma_i^{1/2},
/// y_i = X_i w_i + eps_i.
struct DesignSample {
  Mat X0;
  Vec y0;
  Mat X1;
  Vec y1;
  std::uint64_t seed;
  std::int64_t replicate;
};

/// Draw replicate r of the design model. Pure in (tp, replicate, seed):
/// the same triple yields a bit-identical sample on any thread.
DesignSample sample_design(const TaskPair& tp, std::int64_t replicate,
                           std::uint64_t seed,
                           EntryDistribution dist = EntryDistribution::Gaussian);

AlignmentSummary alignment(const TaskPair& tp);

/// The fixed two-direction frame used for w construction; exposed for tests.
void w_frame(Index p, Vec& u1, Vec& u2);

}  // namespace l2sp
