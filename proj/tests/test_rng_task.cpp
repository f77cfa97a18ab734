#include "l2sp/rng.hpp"
#include "l2sp/task.hpp"

#include <doctest.h>

#include <cmath>

using namespace l2sp;

TEST_CASE("stream rng is reproducible and streams are distinct") {
  Xoshiro256pp a = stream_rng(42, 3, Stream::Z0);
  Xoshiro256pp b = stream_rng(42, 3, Stream::Z0);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  Xoshiro256pp c = stream_rng(42, 3, Stream::Z1);
  Xoshiro256pp d = stream_rng(42, 4, Stream::Z0);
  Xoshiro256pp e = stream_rng(43, 3, Stream::Z0);
  Xoshiro256pp base = stream_rng(42, 3, Stream::Z0);
  const std::uint64_t first = base.next();
  CHECK(first != c.next());
  CHECK(first != d.next());
  CHECK(first != e.next());
}

TEST_CASE("gaussian sampler moments") {
  GaussianSampler g{Xoshiro256pp(7)};
  const int n = 200000;
  double mean = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = g.next();
    const double d = x - mean;
    mean += d / (i + 1);
    m2 += d * (x - mean);
  }
  const double var = m2 / (n - 1);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("w_frame is an orthonormal pair") {
  Vec u1, u2;
  w_frame(12, u1, u2);
  CHECK(u1.norm() == doctest::Approx(1.0));
  CHECK(u2.norm() == doctest::Approx(1.0));
  CHECK(std::abs(u1.dot(u2)) < 1e-14);
}

TEST_CASE("isotropic pair hits alignment targets exactly") {
  // rho = w0_norm * w1_norm gives w1 parallel to w0
  TaskPair aligned = TaskPair::isotropic(16, 4, 4, 1.0, 1.0, 1.0, 0.1, 0.1);
  CHECK((aligned.w1() - aligned.w0()).norm() < 1e-12);

  TaskPair ortho = TaskPair::isotropic(16, 4, 4, 1.0, 0.0, 1.0, 0.1, 0.1);
  CHECK(std::abs(ortho.w0().dot(ortho.w1())) < 1e-12);

  TaskPair pair = TaskPair::isotropic(16, 4, 4, 1.0, 0.5, 1.0, 0.1, 0.1);
  CHECK(pair.w0().dot(pair.w1()) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pair.w0().norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.w1().norm() == doctest::Approx(1.0).epsilon(1e-12));

  const AlignmentSummary al = alignment(pair);
  CHECK(al.rho == doctest::Approx(0.5));
  CHECK(al.w0_norm_sq == doctest::Approx(1.0));
  CHECK(al.w1_norm_sq == doctest::Approx(1.0));

  // anti-aligned
  TaskPair anti = TaskPair::isotropic(16, 4, 4, 1.3, -1.69, 1.3, 0, 0);
  CHECK(alignment(anti).rho == doctest::Approx(-1.69));
}

TEST_CASE("task construction rejects bad parameters") {
  CHECK_THROWS_AS(TaskPair::isotropic(16, 15, 4, 1, 0, 1, 0, 0), InvalidInput);
  CHECK_THROWS_AS(TaskPair::isotropic(16, 4, 15, 1, 0, 1, 0, 0), InvalidInput);
  CHECK_THROWS_AS(TaskPair::isotropic(16, 4, 4, 1, 1.5, 1, 0, 0), InvalidInput);
  CHECK_THROWS_AS(TaskPair::isotropic(16, 4, 4, 1, 0, 1, -0.1, 0), InvalidInput);
}

TEST_CASE("sample_design is bit-reproducible") {
  TaskPair tp = TaskPair::isotropic(24, 6, 8, 1.0, 0.4, 1.1, 0.5, 0.7);
  DesignSample a = sample_design(tp, 5, 99);
  DesignSample b = sample_design(tp, 5, 99);
  CHECK(a.X0 == b.X0);
  CHECK(a.X1 == b.X1);
  CHECK(a.y0 == b.y0);
  CHECK(a.y1 == b.y1);
  DesignSample c = sample_design(tp, 6, 99);
  CHECK(a.X0 != c.X0);
}

TEST_CASE("noiseless labels are exact") {
  TaskPair tp = TaskPair::isotropic(24, 6, 8, 1.0, 0.4, 1.1, 0.0, 0.0);
  DesignSample s = sample_design(tp, 0, 1);
  CHECK((s.y0 - s.X0 * tp.w0()).norm() == 0.0);
  CHECK((s.y1 - s.X1 * tp.w1()).norm() == 0.0);
}

TEST_CASE("design entry moments, isotropic") {
  TaskPair tp = TaskPair::isotropic(1024, 128, 8, 1.0, 0.0, 1.0, 0, 0);
  DesignSample s = sample_design(tp, 0, 2024);  // 128 * 1024 > 1e5 entries
  const double n = static_cast<double>(s.X0.size());
  const double mean = s.X0.sum() / n;
  const double var = (s.X0.array() - mean).square().sum() / (n - 1);
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("label noise variance matches sigma0^2") {
  TaskPair tp = TaskPair::isotropic(256, 200, 8, 1.0, 0.3, 1.0, 0.8, 0.0);
  double ss = 0.0;
  std::int64_t count = 0;
  for (int r = 0; r < 50; ++r) {  // 50 * 200 = 1e4 noise values
    DesignSample s = sample_design(tp, r, 7);
    ss += (s.y0 - s.X0 * tp.w0()).squaredNorm();
    count += s.y0.size();
  }
  const double var = ss / static_cast<double>(count);
  CHECK(std::abs(var - 0.64) < 0.05 * 0.64);
}

TEST_CASE("X0 and X1 are uncorrelated across replicates") {
  TaskPair tp = TaskPair::isotropic(8, 3, 3, 1.0, 0.0, 1.0, 0, 0);
  const int reps = 400;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int r = 0; r < reps; ++r) {
    DesignSample s = sample_design(tp, r, 11);
    const double x = s.X0(0, 0), y = s.X1(0, 0);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  const double n = reps;
  const double corr = (sxy - sx * sy / n) /
                      std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
  CHECK(std::abs(corr) < 3.0 / std::sqrt(n));
}

TEST_CASE("rademacher entries are signs with unit variance") {
  TaskPair tp = TaskPair::isotropic(64, 32, 8, 1.0, 0.0, 1.0, 0, 0);
  DesignSample s = sample_design(tp, 0, 3, EntryDistribution::Rademacher);
  double mean = 0;
  for (Index i = 0; i < s.X0.rows(); ++i) {
    for (Index j = 0; j < s.X0.cols(); ++j) {
      CHECK(std::abs(s.X0(i, j)) == doctest::Approx(1.0));
      mean += s.X0(i, j);
    }
  }
  mean /= static_cast<double>(s.X0.size());
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("diagonal covariance shapes the design") {
  const Index p = 64;
  Vec spectrum = Vec::LinSpaced(p, 0.5, 2.5);
  TaskPair tp = TaskPair::with_spectra(64, 32, 8, spectrum, Vec::Ones(p), 1.0,
                                       0.3, 1.0, 0, 0);
  // column variance of X0 should track the spectrum
  double lo = 0, hi = 0;
  const int reps = 60;
  for (int r = 0; r < reps; ++r) {
    DesignSample s = sample_design(tp, r, 5);
    lo += s.X0.col(0).squaredNorm() / s.X0.rows();
    hi += s.X0.col(p - 1).squaredNorm() / s.X0.rows();
  }
  lo /= reps;
  hi /= reps;
  CHECK(lo == doctest::Approx(0.5).epsilon(0.15));
  CHECK(hi == doctest::Approx(2.5).epsilon(0.15));
}
