#pragma once

#include "l2sp/linalg.hpp"

#include <cmath>
#include <cstdint>

namespace l2sp {

/// Stream tags for per-replicate substreams. Z0/Z1 drive the design
/// matrices, Eps0/Eps1 the label noise; each is derived independently from
/// (master seed, replicate, tag) so replicates are order-insensitive.
enum class Stream : std::uint64_t { Z0 = 1, Z1 = 2, Eps0 = 3, Eps1 = 4 };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// xoshiro256++ with SplitMix64 seeding. Self-contained so that streams are
/// bit-reproducible across standard libraries and platforms.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = detail::splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on (0, 1]; never returns 0 so log() is safe.
  double uniform_pos() { return ((next() >> 11) + 1) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

/// Derive the generator for a (seed, replicate, stream) triple by hashing
/// the triple through SplitMix64.
inline Xoshiro256pp stream_rng(std::uint64_t master_seed,
                               std::uint64_t replicate, Stream stream) {
  std::uint64_t h = master_seed;
  (void)detail::splitmix64(h);
  h ^= 0xD1B54A32D192ED03ULL * (replicate + 1);
  (void)detail::splitmix64(h);
  h ^= 0x8CB92BA72F3D8DD7ULL * static_cast<std::uint64_t>(stream);
  std::uint64_t state = h;
  return Xoshiro256pp(detail::splitmix64(state));
}

/// Standard normal sampler (Box-Muller on the xoshiro stream).
class GaussianSampler {
 public:
  explicit GaussianSampler(Xoshiro256pp gen) : gen_(gen) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = gen_.uniform_pos();
    const double u2 = gen_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  void fill(Mat& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = next();
  }

  void fill(Vec& v) {
    for (Index i = 0; i < v.size(); ++i) v(i) = next();
  }

 private:
  Xoshiro256pp gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Rademacher (+1/-1) sampler; mean 0, variance 1.
class RademacherSampler {
 public:
  explicit RademacherSampler(Xoshiro256pp gen) : gen_(gen) {}

  double next() { return (gen_.next() >> 63) ? 1.0 : -1.0; }

  void fill(Mat& m) {
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) m(i, j) = next();
  }

 private:
  Xoshiro256pp gen_;
};

}  // namespace l2sp
