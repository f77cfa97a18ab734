#include "l2sp/task.hpp"

#include "l2sp/rng.hpp"

#include <cmath>

namespace l2sp {

void w_frame(Index p, Vec& u1, Vec& u2) {
  if (p < 2) throw InvalidInput("w_frame: p must be >= 2");
  u1 = Vec::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
  Vec d = Vec::LinSpaced(p, 1.0, static_cast<double>(p));
  u2 = d - d.dot(u1) * u1;
  u2.normalize();
}

namespace {

void check_counts(Index p, Index n0, Index n1) {
  if (p < 2 || n0 < 1 || n1 < 1) {
    throw InvalidInput("TaskPair: dimensions must be positive, p >= 2");
  }
  if (n0 >= p - 1 || n1 >= p - 1) {
    throw InvalidInput(
        "TaskPair: overparameterized regime requires n0, n1 < p - 1");
  }
}

std::pair<Vec, Vec> make_ws(Index p, double w0_norm, double rho,
                            double w1_norm) {
  if (w0_norm < 0.0 || w1_norm < 0.0) {
    throw InvalidInput("TaskPair: norms must be nonnegative");
  }
  const double cs = w0_norm * w1_norm;
  if (std::abs(rho) > cs * (1.0 + 1e-12) + 1e-300) {
    throw InvalidInput(
        "TaskPair: |rho| exceeds Cauchy-Schwarz bound w0_norm * w1_norm");
  }
  Vec u1, u2;
  w_frame(p, u1, u2);
  Vec w0 = w0_norm * u1;
  Vec w1;
  if (w0_norm == 0.0) {
    w1 = w1_norm * u1;
  } else {
    const double alpha = rho / w0_norm;
    const double beta_sq = w1_norm * w1_norm - alpha * alpha;
    const double beta = std::sqrt(std::max(0.0, beta_sq));
    w1 = alpha * u1 + beta * u2;
  }
  return {w0, w1};
}

}  // namespace

TaskPair::TaskPair(Index p, Index n0, Index n1, SpdMatrix S0, SpdMatrix S1,
                   Vec w0, Vec w1, double sigma0, double sigma1)
    : p_(p),
      n0_(n0),
      n1_(n1),
      sigma0_(sigma0),
      sigma1_(sigma1),
      Sigma0_(std::move(S0)),
      Sigma1_(std::move(S1)),
      w0_(std::move(w0)),
      w1_(std::move(w1)) {
  if (sigma0_ < 0.0 || sigma1_ < 0.0) {
    throw InvalidInput("TaskPair: noise levels must be nonnegative");
  }
  if (!Sigma0_.is_identity()) sqrt0_ = spd_sqrt(Sigma0_);
  if (!Sigma1_.is_identity()) sqrt1_ = spd_sqrt(Sigma1_);
}

TaskPair TaskPair::isotropic(Index p, Index n0, Index n1, double w0_norm,
                             double rho, double w1_norm, double sigma0,
                             double sigma1) {
  check_counts(p, n0, n1);
  auto [w0, w1] = make_ws(p, w0_norm, rho, w1_norm);
  return TaskPair(p, n0, n1, SpdMatrix::identity(p), SpdMatrix::identity(p),
                  std::move(w0), std::move(w1), sigma0, sigma1);
}

TaskPair TaskPair::with_spectra(Index p, Index n0, Index n1,
                                const Vec& spectrum0, const Vec& spectrum1,
                                double w0_norm, double rho, double w1_norm,
                                double sigma0, double sigma1) {
  check_counts(p, n0, n1);
  if (spectrum0.size() != p || spectrum1.size() != p) {
    throw InvalidInput("TaskPair: spectrum length must equal p");
  }
  auto [w0, w1] = make_ws(p, w0_norm, rho, w1_norm);
  return TaskPair(p, n0, n1, SpdMatrix::diagonal(spectrum0),
                  SpdMatrix::diagonal(spectrum1), std::move(w0), std::move(w1),
                  sigma0, sigma1);
}

namespace {

Mat draw_entries(Index rows, Index cols, Xoshiro256pp gen,
                 EntryDistribution dist) {
  Mat z(rows, cols);
  if (dist == EntryDistribution::Gaussian) {
    GaussianSampler g(gen);
    g.fill(z);
  } else {
    RademacherSampler r(gen);
    r.fill(z);
  }
  return z;
}

}  // namespace

DesignSample sample_design(const TaskPair& tp, std::int64_t replicate,
                           std::uint64_t seed, EntryDistribution dist) {
  if (replicate < 0) throw InvalidInput("sample_design: replicate < 0");
  const auto rep = static_cast<std::uint64_t>(replicate);

  DesignSample out;
  out.seed = seed;
  out.replicate = replicate;

  Mat z0 = draw_entries(tp.n0(), tp.p(), stream_rng(seed, rep, Stream::Z0), dist);
  Mat z1 = draw_entries(tp.n1(), tp.p(), stream_rng(seed, rep, Stream::Z1), dist);
  out.X0 = tp.Sigma0().is_identity() ? std::move(z0) : z0 * tp.sqrt_Sigma0();
  out.X1 = tp.Sigma1().is_identity() ? std::move(z1) : z1 * tp.sqrt_Sigma1();

  out.y0 = out.X0 * tp.w0();
  out.y1 = out.X1 * tp.w1();
  if (tp.sigma0() > 0.0) {
    Vec eps0(tp.n0());
    GaussianSampler g0(stream_rng(seed, rep, Stream::Eps0));
    g0.fill(eps0);
    out.y0 += tp.sigma0() * eps0;
  }
  if (tp.sigma1() > 0.0) {
    Vec eps1(tp.n1());
    GaussianSampler g1(stream_rng(seed, rep, Stream::Eps1));
    g1.fill(eps1);
    out.y1 += tp.sigma1() * eps1;
  }
  return out;
}

AlignmentSummary alignment(const TaskPair& tp) {
  return AlignmentSummary{tp.w0().dot(tp.w1()), tp.w0().squaredNorm(),
                          tp.w1().squaredNorm()};
}

}  // namespace l2sp
