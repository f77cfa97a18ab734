#include "l2sp/det_equiv.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace l2sp {

namespace {

constexpr int kMaxIterations = 100000;
constexpr int kDampedIterations = 2000;

void check_spectrum(const Vec& s, double gamma, double tau) {
  if (s.size() == 0) throw InvalidInput("spectrum must be non-empty");
  require_finite(s, "spectrum");
  if (s.minCoeff() < 0.0) throw InvalidInput("spectrum must be nonnegative");
  if (s.maxCoeff() <= 0.0) throw InvalidInput("spectrum must not be all zero");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidInput("gamma must be positive");
  }
  if (tau < 0.0 || !std::isfinite(tau)) {
    throw InvalidInput("tau must be >= 0");
  }
}

double fp_map(const Vec& s, double gamma, double tau, double delta) {
  // gamma * p^{-1} sum_j s_j / (tau + delta s_j); zero eigenvalues contribute 0.
  double acc = 0.0;
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) > 0.0) acc += s(j) / (tau + delta * s(j));
  }
  return gamma * acc / static_cast<double>(s.size());
}

Vec spectrum_of(const SpdMatrix& Sigma, Mat* basis) {
  if (Sigma.is_diagonal()) {
    if (basis) basis->resize(0, 0);
    return Sigma.mat().diagonal();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(Sigma.mat());
  if (es.info() != Eigen::Success) {
    throw ConvergenceError("Sigma eigendecomposition failed");
  }
  if (basis) *basis = es.eigenvectors();
  return es.eigenvalues().cwiseMax(0.0);
}

}  // namespace

DECtx solve_delta_ctx(const Vec& spectrum, double gamma, double tau) {
  check_spectrum(spectrum, gamma, tau);
  if (tau == 0.0 && gamma <= 1.0 && spectrum.minCoeff() <= 0.0) {
    throw InvalidInput(
        "solve_delta: tau = 0 needs gamma > 1 or a strictly positive spectrum");
  }

  DECtx ctx;
  ctx.gamma = gamma;
  ctx.tau = tau;
  ctx.spectrum = spectrum;

  const double mean_s = spectrum.mean();
  double delta = std::sqrt(gamma) * mean_s;
  if (delta <= 0.0) delta = 1.0;

  int it = 0;
  for (; it < kDampedIterations; ++it) {
    const double phi = fp_map(spectrum, gamma, tau, delta);
    const double resid = std::abs(delta - phi);
    if (resid < 1e-12 * std::max(delta, 1.0)) {
      ctx.delta = delta;
      ctx.converged = true;
      ctx.iterations = it + 1;
      ctx.residual = resid;
      return ctx;
    }
    delta = 0.5 * delta + 0.5 * phi;
  }

  // g(delta) = delta - phi(delta) is strictly increasing; the root satisfies
  // delta^2 <= gamma since s/(tau + delta s) <= 1/delta.
  double lo = 1e-300;
  double hi = std::sqrt(gamma) + 1.0;
  for (; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double resid = mid - fp_map(spectrum, gamma, tau, mid);
    if (std::abs(resid) < 1e-13 * std::max(mid, 1.0)) {
      ctx.delta = mid;
      ctx.converged = true;
      ctx.iterations = it + 1;
      ctx.residual = std::abs(resid);
      return ctx;
    }
    (resid > 0.0 ? hi : lo) = mid;
    if (hi - lo < 1e-16 * std::max(hi, 1.0)) break;
  }
  ctx.delta = 0.5 * (lo + hi);
  ctx.iterations = it;
  ctx.residual = std::abs(ctx.delta - fp_map(spectrum, gamma, tau, ctx.delta));
  ctx.converged = ctx.residual < 1e-12 * std::max(ctx.delta, 1.0);
  return ctx;
}

double solve_delta(const Vec& spectrum, double gamma, double tau) {
  DECtx ctx = solve_delta_ctx(spectrum, gamma, tau);
  if (!ctx.converged) {
    throw ConvergenceError("solve_delta: fixed point did not converge");
  }
  return ctx.delta;
}

double isotropic_a(double tau, double gamma) {
  if (!(gamma > 0.0) || tau < 0.0 || !std::isfinite(tau)) {
    throw InvalidInput("isotropic_a: gamma > 0 and tau >= 0 required");
  }
  // Rationalized form of (-tau + sqrt(tau^2 + 4 gamma)) / (2 gamma).
  return 2.0 / (tau + std::sqrt(tau * tau + 4.0 * gamma));
}

Resolvent::Resolvent(const SpdMatrix& Sigma, double gamma, double tau) {
  s_ = spectrum_of(Sigma, &v_);
  ctx_ = solve_delta_ctx(s_, gamma, tau);
  if (!ctx_.converged) {
    throw ConvergenceError("Resolvent: fixed point did not converge");
  }
  if (tau == 0.0 && s_.minCoeff() <= 0.0) {
    throw InvalidInput("Resolvent: singular at tau = 0 with zero eigenvalues");
  }
  q_ = (tau + ctx_.delta * s_.array()).inverse();
}

Vec Resolvent::apply(const Vec& v) const {
  if (v.size() != dim()) throw InvalidInput("Resolvent::apply: dimension");
  if (v_.size() == 0) return q_.cwiseProduct(v);
  return v_ * q_.cwiseProduct(v_.transpose() * v);
}

Mat Resolvent::apply(const Mat& m) const {
  if (m.rows() != dim()) throw InvalidInput("Resolvent::apply: dimension");
  if (v_.size() == 0) return q_.asDiagonal() * m;
  return v_ * (q_.asDiagonal() * (v_.transpose() * m));
}

Mat Resolvent::dense() const {
  if (v_.size() == 0) return Mat(q_.asDiagonal());
  return v_ * q_.asDiagonal() * v_.transpose();
}

double t_functional(const Resolvent& q0, const Resolvent& q1) {
  if (q0.dim() != q1.dim()) {
    throw InvalidInput("t_functional: dimension mismatch");
  }
  const Index p = q0.dim();
  const double tau0 = q0.tau();
  // Q1 Sigma1 Q1 is diagonal in Sigma1's basis with entries q1^2 s1;
  // Q0 - tau0 Q0^2 is diagonal in Sigma0's basis with entries q0 - tau0 q0^2.
  const Vec b1 = q1.q_eigenvalues().array().square() *
                 q1.sigma_eigenvalues().array();
  const Vec a0 = q0.q_eigenvalues().array() *
                 (1.0 - tau0 * q0.q_eigenvalues().array());
  const bool diag0 = q0.basis().size() == 0;
  const bool diag1 = q1.basis().size() == 0;
  if (diag0 && diag1) {
    return b1.dot(a0) / static_cast<double>(p);
  }
  // Cross-basis trace: Tr(B1 A0) = sum_{jl} b1_l a0_j <v1_l, v0_j>^2.
  Mat c;  // p x p of squared inner products
  if (diag1) {
    c = q0.basis().array().square();  // rows: coordinates, cols: j
    return (b1.transpose() * c * a0)(0, 0) / static_cast<double>(p);
  }
  if (diag0) {
    c = q1.basis().array().square();
    return (a0.transpose() * c * b1)(0, 0) / static_cast<double>(p);
  }
  c = (q1.basis().transpose() * q0.basis()).array().square();
  return (b1.transpose() * c * a0)(0, 0) / static_cast<double>(p);
}

BoundaryVerdict isotropic_asymptotic_boundary(double w0_norm_sq, double rho,
                                              double sigma0, double gamma0,
                                              double tau0) {
  if (w0_norm_sq < 0.0 || sigma0 < 0.0) {
    throw InvalidInput("isotropic_asymptotic_boundary: negative inputs");
  }
  const double a0 = isotropic_a(tau0, gamma0);
  BoundaryVerdict v;
  v.criterion = BoundaryCriterion::AsymptoticIsotropic;
  v.lhs = 2.0 * rho;
  v.rhs = gamma0 * a0 * a0 * w0_norm_sq + sigma0 * sigma0 * gamma0 * a0;
  v.transfer_beneficial = v.lhs > v.rhs;
  return v;
}

namespace {

double positive_fraction(const Vec& s) {
  Index c = 0;
  for (Index j = 0; j < s.size(); ++j)
    if (s(j) > 0.0) ++c;
  return static_cast<double>(c) / static_cast<double>(s.size());
}

}  // namespace

SampleDE solve_sample_de(const SpdMatrix& Sigma, double gamma, double tau) {
  SampleDE de;
  de.gamma = gamma;
  de.tau = tau;
  de.s = spectrum_of(Sigma, &de.basis);
  check_spectrum(de.s, gamma, tau);
  const Index p = de.s.size();
  const auto theta = [&](double scale, double offset) {
    // p^{-1} sum s_j / (offset + scale * s_j)
    double acc = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (de.s(j) > 0.0) acc += de.s(j) / (offset + scale * de.s(j));
    }
    return acc / static_cast<double>(p);
  };

  if (tau > 0.0) {
    // x = 1 / (1 + gamma theta(x)), theta(x) = p^{-1} Tr(Sigma (tau + x Sigma)^{-1}).
    double x = 0.5;
    int it = 0;
    for (; it < kDampedIterations; ++it) {
      const double xn = 1.0 / (1.0 + gamma * theta(x, tau));
      if (std::abs(xn - x) < 1e-14 * std::max(x, 1e-3)) {
        x = xn;
        break;
      }
      x = 0.5 * x + 0.5 * xn;
    }
    // Bisection fallback on h(x) = x - 1/(1 + gamma theta(x)), increasing.
    double resid = x - 1.0 / (1.0 + gamma * theta(x, tau));
    if (std::abs(resid) >= 1e-13) {
      double lo = 1e-300, hi = 1.0;
      for (; it < kMaxIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        resid = mid - 1.0 / (1.0 + gamma * theta(mid, tau));
        if (std::abs(resid) < 1e-14) {
          x = mid;
          break;
        }
        (resid > 0.0 ? hi : lo) = mid;
        x = mid;
        if (hi - lo < 1e-17) break;
      }
    }
    de.ridgeless = false;
    de.y = x;
    de.iterations = it + 1;
    de.residual = std::abs(x - 1.0 / (1.0 + gamma * theta(x, tau)));
    de.k = (tau + x * de.s.array()).inverse();
    return de;
  }

  // Ridgeless: u gamma p^{-1} Tr(Sigma (I + u Sigma)^{-1}) = 1, solvable iff
  // gamma * (positive-eigenvalue fraction) > 1.
  const double reach = gamma * positive_fraction(de.s);
  if (reach <= 1.0 + 1e-12) {
    throw InvalidInput(
        "solve_sample_de: ridgeless limit requires gamma * positive-fraction > 1");
  }
  const auto h = [&](double u) { return u * gamma * theta(u, 1.0) - 1.0; };
  double lo = 0.0, hi = 1.0;
  int it = 0;
  while (h(hi) < 0.0 && it < 200) {
    hi *= 2.0;
    ++it;
  }
  double u = hi;
  for (; it < kMaxIterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double resid = h(mid);
    u = mid;
    if (std::abs(resid) < 1e-14) break;
    (resid > 0.0 ? hi : lo) = mid;
    if (hi - lo < 1e-15 * std::max(hi, 1.0)) break;
  }
  de.ridgeless = true;
  de.y = u;
  de.iterations = it + 1;
  de.residual = std::abs(h(u));
  de.k = (1.0 + u * de.s.array()).inverse();
  return de;
}

namespace {

// A solved SampleDE in unified (y, k) form plus the derived second-order
// scalars. f_j = y s_j k_j is the prior-pass factor; m_j = 1 - f_j.
struct SideDE {
  SampleDE de;
  Vec f;
  Vec m;
  double phi = 0.0;    // p^{-1} Tr((Sigma Qbar)^2) in y-scale: mean (s k)^2
  double denom = 0.0;  // 1 - gamma y^2 phi
  bool degenerate_identity = false;  // gamma = 1, tau = 0 limit: f = 1, m = 0
};

SideDE make_side(const SpdMatrix& Sigma, double gamma, double tau,
                 bool allow_gamma_one) {
  SideDE side;
  if (tau == 0.0 && allow_gamma_one) {
    Mat basis;
    const Vec s = spectrum_of(Sigma, &basis);
    if (std::abs(gamma - 1.0) < 1e-12 && s.minCoeff() > 0.0) {
      side.de.gamma = gamma;
      side.de.tau = 0.0;
      side.de.ridgeless = true;
      side.de.s = s;
      side.de.basis = basis;
      side.de.y = std::numeric_limits<double>::infinity();
      side.de.k = Vec::Zero(s.size());
      side.f = Vec::Ones(s.size());
      side.m = Vec::Zero(s.size());
      side.phi = 0.0;
      side.denom = 1.0;
      side.degenerate_identity = true;
      return side;
    }
  }
  side.de = solve_sample_de(Sigma, gamma, tau);
  const Index p = side.de.s.size();
  side.f = side.de.y * side.de.s.cwiseProduct(side.de.k);
  side.m = Vec::Ones(p) - side.f;
  side.phi = side.de.s.cwiseProduct(side.de.k).squaredNorm() /
             static_cast<double>(p);
  side.denom = 1.0 - gamma * side.de.y * side.de.y * side.phi;
  if (side.denom <= 0.0) {
    throw ConvergenceError("asymptotic boundary: second-order scale diverges");
  }
  return side;
}

}  // namespace

BoundaryVerdict asymptotic_boundary_general(const SpdMatrix& Sigma0,
                                            const SpdMatrix& Sigma1,
                                            const Vec& w0, const Vec& w1,
                                            double sigma0, double gamma0,
                                            double gamma1, double tau0,
                                            double tau1) {
  if (Sigma0.dim() != Sigma1.dim() || w0.size() != Sigma0.dim() ||
      w1.size() != Sigma0.dim()) {
    throw InvalidInput("asymptotic_boundary: dimension mismatch");
  }
  if (sigma0 < 0.0) throw InvalidInput("asymptotic_boundary: sigma0 < 0");
  const Index p = Sigma0.dim();
  const double pd = static_cast<double>(p);

  SideDE s0 = make_side(Sigma0, gamma0, tau0, /*allow_gamma_one=*/sigma0 == 0.0);
  SideDE s1 = make_side(Sigma1, gamma1, tau1, /*allow_gamma_one=*/false);

  // Target-side kernel: E[G1 Sigma1 G1] -> kappa1 * diag(k1^2 s1) in the
  // Sigma1 eigenbasis (G1 in n1 M1 units for tau1 > 0, I - P1 units at 0).
  const double kappa1 = 1.0 / s1.denom;
  const Vec b = kappa1 * s1.de.k.array().square() * s1.de.s.array();

  const bool diag0 = s0.de.basis.size() == 0;
  const bool diag1 = s1.de.basis.size() == 0;
  const Vec w0_0 = diag0 ? w0 : Vec(s0.de.basis.transpose() * w0);  // Sigma0 basis
  const Vec w0_1 = diag1 ? w0 : Vec(s1.de.basis.transpose() * w0);  // Sigma1 basis
  const Vec w1_1 = diag1 ? w1 : Vec(s1.de.basis.transpose() * w1);

  // F0 w0 expressed in the Sigma1 basis.
  Vec f0w0 = s0.f.cwiseProduct(w0_0);
  if (!diag0) f0w0 = s0.de.basis * f0w0;
  const Vec f0w0_1 = diag1 ? f0w0 : Vec(s1.de.basis.transpose() * f0w0);

  // b carried into the Sigma0 basis: bb0_j = sum_l b_l <v1_l, v0_j>^2.
  Vec bb0;
  if (diag0 && diag1) {
    bb0 = b;
  } else if (diag0) {
    // <v1_l, e_j>^2 = V1(j, l)^2
    bb0 = s1.de.basis.array().square().matrix() * b;
  } else if (diag1) {
    // <e_l, v0_j>^2 = V0(l, j)^2
    bb0 = s0.de.basis.array().square().matrix().transpose() * b;
  } else {
    const Mat cross = s1.de.basis.transpose() * s0.de.basis;  // (l, j)
    bb0 = cross.array().square().matrix().transpose() * b;
  }

  BoundaryVerdict v;
  v.criterion = BoundaryCriterion::Asymptotic;
  v.lhs = 2.0 * f0w0_1.dot(b.cwiseProduct(w1_1));

  // Prior bias: main term plus the source-side second-order correction.
  const double prior_main = f0w0_1.dot(b.cwiseProduct(f0w0_1));
  double prior_corr = 0.0;
  double noise = 0.0;
  if (!s0.degenerate_identity) {
    const Vec k0 = s0.de.k;
    const Vec sk0sq = s0.de.s.cwiseProduct(k0.cwiseProduct(k0));
    const double psi_b = sk0sq.dot(bb0) / pd;       // p^{-1} Tr(S0 Q0 B Q0)
    const double c_b = gamma0 * s0.de.y * s0.de.y * psi_b / s0.denom;
    const double m_quad =
        s0.m.array().square().matrix().dot(s0.de.s.cwiseProduct(
            w0_0.cwiseProduct(w0_0)));  // w0' M0 Sigma0 M0 w0
    prior_corr = c_b * m_quad;

    if (sigma0 > 0.0) {
      if (tau0 > 0.0) {
        const double tr_bq = k0.dot(bb0) / pd;
        const double tr_bq2 = k0.cwiseProduct(k0).dot(bb0) / pd;
        const double psi_i = sk0sq.mean();
        const double c_i = gamma0 * s0.de.y * s0.de.y * psi_i / s0.denom;
        noise = sigma0 * sigma0 * gamma0 *
                (tr_bq - tau0 * tr_bq2 - tau0 * c_i * psi_b);
      } else {
        // Ridgeless source noise: exact Wishart limit, isotropic only.
        if (!(Sigma0.is_identity() && Sigma1.is_identity())) {
          throw InvalidInput(
              "asymptotic_boundary: tau0 = 0 with sigma0 > 0 is supported "
              "only for isotropic covariances");
        }
        if (gamma0 <= 1.0) {
          throw InvalidInput(
              "asymptotic_boundary: ridgeless source noise needs gamma0 > 1");
        }
        // E Tr((X0'X0)^+) / p -> 1 / (gamma0 (gamma0 - 1)), times gamma0 b.
        noise = sigma0 * sigma0 * b(0) / (gamma0 - 1.0);
      }
    }
  } else if (sigma0 > 0.0) {
    throw InvalidInput(
        "asymptotic_boundary: gamma0 = 1 with tau0 = 0 requires sigma0 = 0");
  }

  v.rhs = prior_main + prior_corr + noise;
  v.transfer_beneficial = v.lhs > v.rhs;
  return v;
}

BoundaryVerdict asymptotic_boundary(const TaskPair& tp, double tau0,
                                    double tau1) {
  return asymptotic_boundary_general(tp.Sigma0(), tp.Sigma1(), tp.w0(),
                                     tp.w1(), tp.sigma0(), tp.gamma0(),
                                     tp.gamma1(), tau0, tau1);
}

}  // namespace l2sp
