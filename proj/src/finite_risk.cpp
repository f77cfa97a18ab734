#include "l2sp/finite_risk.hpp"

#include "l2sp/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace l2sp {

const char* to_string(BoundaryCriterion c) {
  switch (c) {
    case BoundaryCriterion::FiniteGeneral: return "finite";
    case BoundaryCriterion::FiniteIsotropicRidgeless: return "finite-isotropic";
    case BoundaryCriterion::Asymptotic: return "asymptotic";
    case BoundaryCriterion::AsymptoticIsotropic: return "asymptotic-isotropic";
  }
  return "?";
}

namespace {

struct EigGram {
  Mat u;         // eigenvectors of X X'
  Vec d;         // eigenvalues (ascending, Eigen's order)
  double d_tol;  // eigenvalues below this are rank-deficient at lambda = 0
};

EigGram eig_gram(const Mat& x) {
  EigGram g;
  Mat k = Mat::Zero(x.rows(), x.rows());
  k.selfadjointView<Eigen::Lower>().rankUpdate(x);
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("eig_gram: eigendecomposition failed");
  }
  g.u = es.eigenvectors();
  g.d = es.eigenvalues().cwiseMax(0.0);
  const double smax = std::sqrt(g.d.maxCoeff());
  const double stol = pinv_rank_tolerance(x.rows(), x.cols(), smax);
  g.d_tol = stol * stol;
  return g;
}

// 1/(d + lambda) elementwise; at lambda = 0 eigenvalues at or below the rank
// tolerance are dropped, matching pseudo-inverse truncation.
Vec resolvent_diag(const EigGram& g, double lambda) {
  Vec e(g.d.size());
  if (lambda > 0.0) {
    e = (g.d.array() + lambda).inverse();
  } else {
    for (Index i = 0; i < g.d.size(); ++i) {
      e(i) = g.d(i) > g.d_tol ? 1.0 / g.d(i) : 0.0;
    }
  }
  return e;
}

// Per-replicate calculator. The Gram eigendecompositions and cross-Gram are
// computed once; terms(lambda0, lambda1) is then O(n0*n1) in the isotropic
// case, so penalty grids are cheap.
class ReplicateEngine {
 public:
  ReplicateEngine(const Mat& x0, const Mat& x1, const TaskPair& tp)
      : x0_(x0), x1_(x1), tp_(tp) {
    iso_ = tp.Sigma0().is_identity() && tp.Sigma1().is_identity();
    e0_ = eig_gram(x0);
    e1_ = eig_gram(x1);
    q0w0_ = e0_.u.transpose() * (x0 * tp.w0());
    q0w1_ = e0_.u.transpose() * (x0 * tp.w1());
    q1w1_ = e1_.u.transpose() * (x1 * tp.w1());
    t_ = e1_.u.transpose() * (x1 * x0.transpose()) * e0_.u;
    tt_ = t_.cwiseProduct(t_);
    w11_ = tp.w1().squaredNorm();
  }

  ConditionalRiskTerms terms(double lambda0, double lambda1) const {
    return iso_ ? terms_isotropic(lambda0, lambda1)
                : terms_general(lambda0, lambda1);
  }

  bool isotropic() const { return iso_; }

  // Rao-Blackwellized boundary integrands for the isotropic Gaussian case.
  // Under a joint rotation of both designs the distribution is invariant, so
  // E[w0' A0 G1^2 w1] = (<w0,w1>/p) E[Tr(A0 G1^2)] and likewise for the
  // prior norm: the trace statistics are unbiased for the same expectations
  // with O(1/p) fluctuations instead of O(1/sqrt(p)). Everything reduces to
  // the diagonal of W = X0 G1^2 X0' in the K0 eigenbasis:
  //   cross  = (rho/p)  sum e0 diag(W),
  //   prior  = (w0sq/p) sum d0 e0^2 diag(W),
  //   V0     =          sum e0^2 diag(W).
  struct BoundaryTraces {
    double cross = 0.0;
    double prior = 0.0;
    double v0 = 0.0;
  };

  BoundaryTraces boundary_traces(double l0, double l1, double rho,
                                 double w0sq) const {
    const Vec e0 = resolvent_diag(e0_, l0);
    const Vec e1 = resolvent_diag(e1_, l1);
    const Vec diag_w =
        e0_.d + tt_.transpose() *
                    Vec(e1_.d.cwiseProduct(e1.cwiseProduct(e1)) - 2.0 * e1);
    const double pd = static_cast<double>(x0_.cols());
    BoundaryTraces out;
    out.cross = rho / pd * e0.dot(diag_w);
    out.prior =
        w0sq / pd * e0.cwiseProduct(e0).cwiseProduct(e0_.d).dot(diag_w);
    out.v0 = e0.cwiseProduct(e0).dot(diag_w);
    return out;
  }

 private:
  // All quantities in the eigenbases of the Grams K_i = X_i X_i'. With
  // C0 = (K0 + l0)^{-1} and C1 = (K1 + l1)^{-1}:
  //   A0 w0 = X0' C0 X0 w0,  G1 v = v - X1' C1 X1 v,  S0 = X0' C0,
  //   T1 = X1' C1;  B, V0, V1 and the boundary terms follow by expanding
  // the Euclidean norms through the Grams.
  ConditionalRiskTerms terms_isotropic(double l0, double l1) const {
    const Vec e0 = resolvent_diag(e0_, l0);
    const Vec e1 = resolvent_diag(e1_, l1);

    const Vec alpha = e0.cwiseProduct(q0w0_);          // U0-coords of C0 X0 w0
    const Vec c = t_ * alpha;                          // U1-coords of X1 A0 w0
    const Vec beta = e1.cwiseProduct(c);
    const Vec eta = e1.cwiseProduct(q1w1_);

    ConditionalRiskTerms out;
    out.cross = alpha.dot(q0w1_) - c.dot(eta) - beta.dot(q1w1_) +
                beta.dot(e1_.d.cwiseProduct(eta));
    out.prior_norm_sq = alpha.dot(e0_.d.cwiseProduct(alpha)) -
                        2.0 * c.dot(beta) +
                        beta.dot(e1_.d.cwiseProduct(beta));
    out.scratch_bias =
        w11_ - 2.0 * eta.dot(q1w1_) + eta.dot(e1_.d.cwiseProduct(eta));
    out.transfer_bias =
        out.prior_norm_sq - 2.0 * out.cross + out.scratch_bias;

    const Vec e0sq = e0.cwiseProduct(e0);
    const Vec coeff =
        e1_.d.cwiseProduct(e1.cwiseProduct(e1)) - 2.0 * e1;
    out.var_source_coeff = e0_.d.dot(e0sq) + coeff.dot(tt_ * e0sq);
    out.var_target_coeff = e1_.d.dot(e1.cwiseProduct(e1));
    out.scratch_var_coeff = out.var_target_coeff;
    return out;
  }

  ConditionalRiskTerms terms_general(double l0, double l1) const {
    const Vec e0 = resolvent_diag(e0_, l0);
    const Vec e1 = resolvent_diag(e1_, l1);
    const auto c0_apply = [&](const Vec& v) -> Vec {
      return e0_.u * e0.cwiseProduct(e0_.u.transpose() * v);
    };
    const auto c1_apply = [&](const Vec& v) -> Vec {
      return e1_.u * e1.cwiseProduct(e1_.u.transpose() * v);
    };

    const Vec u = x0_.transpose() * c0_apply(x0_ * tp_.w0());  // A0 w0
    const Vec a = u - x1_.transpose() * c1_apply(x1_ * u);     // G1 A0 w0
    const Vec b = tp_.w1() - x1_.transpose() * c1_apply(x1_ * tp_.w1());

    const SpdMatrix& s1 = tp_.Sigma1();
    ConditionalRiskTerms out;
    out.cross = s1.is_identity() ? a.dot(b) : a.dot(s1.mat() * b);
    out.prior_norm_sq = sigma_norm_sq(a, s1);
    out.scratch_bias = sigma_norm_sq(b, s1);
    out.transfer_bias = sigma_norm_sq(a - b, s1);

    // S0 = X0' C0 and T1 = X1' C1 as p x n matrices.
    const Mat s0 =
        x0_.transpose() * (e0_.u * e0.asDiagonal() * e0_.u.transpose());
    const Mat c1r = e1_.u * e1.asDiagonal() *
                    (e1_.u.transpose() * (x1_ * s0));
    const Mat w = s0 - x1_.transpose() * c1r;  // G1 S0
    out.var_source_coeff = sigma_frob_sq(w, s1);
    const Mat t1 =
        x1_.transpose() * (e1_.u * e1.asDiagonal() * e1_.u.transpose());
    out.var_target_coeff = sigma_frob_sq(t1, s1);
    out.scratch_var_coeff = out.var_target_coeff;
    return out;
  }

  const Mat& x0_;
  const Mat& x1_;
  const TaskPair& tp_;
  bool iso_;
  EigGram e0_, e1_;
  Mat t_, tt_;
  Vec q0w0_, q0w1_, q1w1_;
  double w11_ = 0.0;
};

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double stderr_of_mean() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / (static_cast<double>(n) * (n - 1)));
  }
};

void check_mc(const McOptions& opts) {
  if (opts.replicates < 2) {
    throw InvalidInput("mc: replicates must be >= 2");
  }
}

void check_lambdas(double l0, double l1) {
  if (l0 < 0.0 || l1 < 0.0 || !std::isfinite(l0) || !std::isfinite(l1)) {
    throw InvalidInput("penalties must be finite and >= 0");
  }
}

}  // namespace

ConditionalRiskTerms conditional_risk_terms(const Mat& X0, const Mat& X1,
                                            const TaskPair& tp, double lambda0,
                                            double lambda1) {
  if (X0.cols() != tp.p() || X1.cols() != tp.p()) {
    throw InvalidInput("conditional_risk_terms: design width must equal p");
  }
  require_finite(X0, "conditional_risk_terms: X0");
  require_finite(X1, "conditional_risk_terms: X1");
  check_lambdas(lambda0, lambda1);
  return ReplicateEngine(X0, X1, tp).terms(lambda0, lambda1);
}

std::vector<RiskReport> mc_expected_risk_lambda0_sweep(
    const TaskPair& tp, const std::vector<double>& lambda0s, double lambda1,
    const McOptions& opts) {
  check_mc(opts);
  for (double l0 : lambda0s) check_lambdas(l0, lambda1);
  const std::int64_t reps = opts.replicates;
  const std::size_t grid = lambda0s.size();

  std::vector<ConditionalRiskTerms> store(static_cast<std::size_t>(reps) * grid);
  parallel_for_index(reps, opts.threads, [&](std::int64_t r) {
    const DesignSample ds = sample_design(tp, r, opts.seed, opts.dist);
    ReplicateEngine eng(ds.X0, ds.X1, tp);
    for (std::size_t g = 0; g < grid; ++g) {
      store[static_cast<std::size_t>(r) * grid + g] =
          eng.terms(lambda0s[g], lambda1);
    }
  });

  const double s0sq = tp.sigma0() * tp.sigma0();
  const double s1sq = tp.sigma1() * tp.sigma1();
  std::vector<RiskReport> reports(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    Welford bias, v0, v1, sbias, delta;
    for (std::int64_t r = 0; r < reps; ++r) {
      const auto& t = store[static_cast<std::size_t>(r) * grid + g];
      bias.add(t.transfer_bias);
      v0.add(t.var_source_coeff);
      v1.add(t.var_target_coeff);
      sbias.add(t.scratch_bias);
      // sigma1 variance cancels exactly between the two estimators.
      delta.add(t.scratch_bias - t.transfer_bias - s0sq * t.var_source_coeff);
    }
    RiskReport rep;
    rep.transfer_bias = bias.mean;
    rep.transfer_var_source = s0sq * v0.mean;
    rep.transfer_var_target = s1sq * v1.mean;
    rep.transfer_risk =
        rep.transfer_bias + rep.transfer_var_source + rep.transfer_var_target;
    rep.scratch_risk = sbias.mean + s1sq * v1.mean;
    // sigma1-free by exact cancellation; equals scratch - transfer up to
    // floating-point reassociation.
    rep.delta = delta.mean;
    rep.mc_replicates = reps;
    rep.mc_stderr = delta.stderr_of_mean();
    reports[g] = rep;
  }
  return reports;
}

RiskReport mc_expected_risk(const TaskPair& tp, double lambda0, double lambda1,
                            const McOptions& opts) {
  return mc_expected_risk_lambda0_sweep(tp, {lambda0}, lambda1, opts).front();
}

BoundaryVerdict finite_boundary(const TaskPair& tp, double lambda0,
                                double lambda1, const McOptions& opts) {
  check_mc(opts);
  check_lambdas(lambda0, lambda1);
  const std::int64_t reps = opts.replicates;
  const double tau1 = lambda1 / static_cast<double>(tp.n1());
  const double scale = lambda1 > 0.0 ? tau1 * tau1 : 1.0;
  const double s0sq = tp.sigma0() * tp.sigma0();
  const double rho = tp.w0().dot(tp.w1());
  const double w0sq = tp.w0().squaredNorm();
  // Rotation invariance holds for Gaussian isotropic designs only.
  const bool rao_blackwell = tp.Sigma0().is_identity() &&
                             tp.Sigma1().is_identity() &&
                             opts.dist == EntryDistribution::Gaussian;

  std::vector<std::pair<double, double>> rows(reps);
  parallel_for_index(reps, opts.threads, [&](std::int64_t r) {
    const DesignSample ds = sample_design(tp, r, opts.seed, opts.dist);
    const ReplicateEngine eng(ds.X0, ds.X1, tp);
    if (rao_blackwell) {
      const auto tr = eng.boundary_traces(lambda0, lambda1, rho, w0sq);
      rows[r] = {2.0 * tr.cross / scale, (tr.prior + s0sq * tr.v0) / scale};
    } else {
      const ConditionalRiskTerms t = eng.terms(lambda0, lambda1);
      rows[r] = {2.0 * t.cross / scale,
                 (t.prior_norm_sq + s0sq * t.var_source_coeff) / scale};
    }
  });

  Welford lhs, rhs;
  for (const auto& [l, r] : rows) {
    lhs.add(l);
    rhs.add(r);
  }
  BoundaryVerdict v;
  v.criterion = BoundaryCriterion::FiniteGeneral;
  v.lhs = lhs.mean;
  v.rhs = rhs.mean;
  v.lhs_stderr = lhs.stderr_of_mean();
  v.rhs_stderr = rhs.stderr_of_mean();
  v.transfer_beneficial = v.lhs > v.rhs;
  return v;
}

BoundaryVerdict isotropic_ridgeless_boundary(double w0_norm_sq, double rho,
                                             double sigma0, Index n0, Index p) {
  if (p < 2 || n0 < 1 || n0 >= p - 1) {
    throw InvalidInput("isotropic_ridgeless_boundary: requires 1 <= n0 < p - 1");
  }
  if (w0_norm_sq < 0.0 || sigma0 < 0.0) {
    throw InvalidInput("isotropic_ridgeless_boundary: negative norms");
  }
  BoundaryVerdict v;
  v.criterion = BoundaryCriterion::FiniteIsotropicRidgeless;
  v.lhs = 2.0 * rho;
  v.rhs = w0_norm_sq + sigma0 * sigma0 * static_cast<double>(p) /
                           static_cast<double>(p - n0 - 1);
  v.transfer_beneficial = v.lhs > v.rhs;
  return v;
}

}  // namespace l2sp
