#include "l2sp/estimators.hpp"
#include "l2sp/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace l2sp;

namespace {

Mat random_mat(Index n, Index p, std::uint64_t seed) {
  Mat x(n, p);
  GaussianSampler g{Xoshiro256pp(seed)};
  g.fill(x);
  return x;
}

Vec random_vec(Index n, std::uint64_t seed) {
  Vec v(n);
  GaussianSampler g{Xoshiro256pp(seed)};
  g.fill(v);
  return v;
}

}  // namespace

TEST_CASE("fit_source basics") {
  Mat x = random_mat(4, 10, 1);
  FittedModel zero = fit_source(x, Vec::Zero(4), 0.9);
  CHECK(zero.beta.norm() == doctest::Approx(0.0));
  CHECK(zero.kind == ModelKind::Source);
  CHECK_FALSE(zero.prior_ref.has_value());

  // ridgeless fit interpolates in the overparameterized regime
  Vec y = random_vec(4, 2);
  FittedModel interp = fit_source(x, y, 0.0);
  CHECK((x * interp.beta - y).norm() < 1e-8);

  // shrinkage: coefficient norm decreases along a lambda grid
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {0.1, 1.0, 10.0, 100.0, 1000.0}) {
    const double norm = fit_source(x, y, lambda).beta.norm();
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("fit_transfer reduces to scratch with a zero prior") {
  Mat x = random_mat(5, 12, 3);
  Vec y = random_vec(5, 4);
  for (double lambda : {0.0, 0.3, 2.0}) {
    FittedModel s = fit_scratch(x, y, lambda);
    FittedModel t = fit_transfer(x, y, lambda, Vec::Zero(12));
    CHECK((s.beta - t.beta).norm() < 1e-12 * (1.0 + s.beta.norm()));
    CHECK(t.kind == ModelKind::TransferTarget);
    CHECK(t.prior_ref.has_value());
  }
}

TEST_CASE("fit_transfer approaches the prior as lambda grows") {
  Mat x = random_mat(5, 12, 5);
  Vec y = random_vec(5, 6);
  Vec beta0 = random_vec(12, 7);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double gap = (fit_transfer(x, y, lambda, beta0).beta - beta0).norm();
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("ridgeless transfer projects onto the constraint set") {
  Mat x = random_mat(5, 12, 8);
  Vec y = random_vec(5, 9);
  Vec beta0 = random_vec(12, 10);
  FittedModel t = fit_transfer(x, y, 0.0, beta0);
  CHECK((x * t.beta - y).norm() < 1e-8);
  // beta - beta0 lies in row(X): annihilated by I - X^+ X
  Mat p = pseudo_inverse(x) * x;
  const Vec d = t.beta - beta0;
  CHECK(((Mat::Identity(12, 12) - p) * d).norm() < 1e-9 * (1.0 + d.norm()));
}

TEST_CASE("transfer fit matches the composite closed form") {
  const Index n0 = 4, n1 = 5, p = 9;
  Mat x0 = random_mat(n0, p, 11);
  Mat x1 = random_mat(n1, p, 12);
  Vec y0 = random_vec(n0, 13);
  Vec y1 = random_vec(n1, 14);
  const double l0 = 0.6, l1 = 1.7;

  const Vec beta0 = fit_source(x0, y0, l0).beta;
  const Vec beta = fit_transfer(x1, y1, l1, beta0).beta;

  const Mat m0 = (x0.transpose() * x0 + l0 * Mat::Identity(p, p)).inverse();
  const Mat m1 = (x1.transpose() * x1 + l1 * Mat::Identity(p, p)).inverse();
  const Vec composite =
      m1 * (x1.transpose() * y1 + l1 * (m0 * (x0.transpose() * y0)));
  CHECK((beta - composite).norm() < 1e-9 * composite.norm());
}

TEST_CASE("transfer fit is a first-order optimum of the L2-SP objective") {
  const Index n = 6, p = 12;
  Mat x = random_mat(n, p, 15);
  Vec y = random_vec(n, 16);
  Vec beta0 = random_vec(p, 17);
  const double lambda = 0.8;
  const Vec beta = fit_transfer(x, y, lambda, beta0).beta;

  const Vec r = y - x * beta;
  const Vec d = beta - beta0;
  const double obj = r.squaredNorm() + lambda * d.squaredNorm();
  const double eta = 1e-3;

  GaussianSampler g{Xoshiro256pp(18)};
  Vec u(p);
  const Vec grad = x.transpose() * r - lambda * d;  // must vanish at the optimum
  double min_diff = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000000; ++k) {
    g.fill(u);
    u.normalize();
    // obj(beta + eta u) - obj(beta), expanded exactly
    const double diff = -2.0 * eta * grad.dot(u) +
                        eta * eta * ((x * u).squaredNorm() + lambda);
    min_diff = std::min(min_diff, diff);
  }
  CHECK(min_diff >= -1e-12 * obj);
  CHECK(min_diff >= 0.0);
}

TEST_CASE("target_risk") {
  TaskPair tp = TaskPair::isotropic(12, 4, 4, 1.0, 0.5, 1.2, 0.1, 0.1);
  CHECK(target_risk(tp.w1(), tp) == doctest::Approx(0.0));
  CHECK(target_risk(Vec::Zero(12), tp) ==
        doctest::Approx(tp.w1().squaredNorm()));

  Vec spectrum(12);
  spectrum.setOnes();
  spectrum(0) = 2.0;
  TaskPair td = TaskPair::with_spectra(12, 4, 4, Vec::Ones(12), spectrum, 1.0,
                                       0.5, 1.2, 0.1, 0.1);
  const Vec beta = td.w1() + Vec::Unit(12, 0);
  CHECK(target_risk(beta, td) == doctest::Approx(2.0));
}
