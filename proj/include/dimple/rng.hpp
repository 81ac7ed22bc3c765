// Deterministic random streams. Every stream is keyed by a user seed plus a
// list of integer tags, so replications / layers / restarts can each own an
// independent substream regardless of execution order or thread count.
#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace dimple {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds tags into a single 64-bit stream key.
inline std::uint64_t mix_key(std::uint64_t seed,
                             std::initializer_list<std::uint64_t> tags = {}) {
  std::uint64_t s = seed ^ 0x243f6a8885a308d3ULL;
  splitmix64(s);
  for (std::uint64_t t : tags) {
    s ^= t;
    splitmix64(s);
  }
  return s;
}

// xoshiro256** seeded via splitmix64. All distributions below are hand-rolled
// so that a given key produces the same sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t key) {
    std::uint64_t sm = key;
    for (auto& w : s_) w = splitmix64(sm);
    have_normal_ = false;
  }

  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
      : Rng(mix_key(seed, tags)) {}

  std::uint64_t u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return double(u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller; the second member of each pair is cached.
  double normal() {
    if (have_normal_) {
      have_normal_ = false;
      return cached_normal_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    cached_normal_ = radius * std::sin(angle);
    have_normal_ = true;
    return radius * std::cos(angle);
  }

  // Marsaglia-Tsang; the alpha < 1 case uses the standard boosting identity.
  double gamma(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("gamma: alpha must be > 0");
    if (alpha < 1.0) {
      const double g = gamma(alpha + 1.0);
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return g * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> g(alpha.size());
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      g[i] = gamma(alpha[i]);
      total += g[i];
    }
    if (total <= 0.0) throw std::runtime_error("dirichlet: degenerate draw");
    for (auto& v : g) v /= total;
    return g;
  }

  // Single draw from a categorical distribution; returns a 0-based index.
  int categorical(const std::vector<double>& p) {
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      cum += p[i];
      if (u < cum) return int(i);
    }
    return int(p.size()) - 1;  // guards against cum < 1 from rounding
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool have_normal_;
};

}  // namespace dimple
