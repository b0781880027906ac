#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace popsel {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}
}  // namespace detail

// Splittable deterministic RNG: a xoshiro256** engine whose state is
// derived from the (seed, stream_id) pair by SplitMix64. Equal pairs
// reproduce equal draw sequences bit-for-bit, and derived sub-streams are
// statistically independent, which is what lets PP-plot trials and
// parallel chains replay exactly regardless of thread scheduling.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id) {
    std::uint64_t sm = seed ^ detail::mix64(stream_id + 0x632BE59BD9B4E019ULL);
    for (auto& word : state_) word = detail::splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  /// Independent stream derived from this one; deterministic in (seed,
  /// stream_id, substream).
  RngStream split(std::uint64_t substream) const {
    return RngStream(seed_, detail::mix64(stream_ + 0x9E3779B97F4A7C15ULL *
                                                        (substream + 1)));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5ULL, 7) * 9ULL;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1); rejects exact zero (needed under logs and powers).
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Marsaglia polar method; the spare deviate is
  /// cached, so consumption order is fixed and replayable.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang, with the u^(1/shape) boost for
  /// shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("RngStream::gamma: shape <= 0");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  std::size_t uniform_index(std::size_t n) {
    // Unbiased bounded draw by rejection.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Dirichlet draw by normalised Gamma variates. All concentrations must be
/// > 0; the length-1 case returns {1.0} exactly.
inline std::vector<double> dirichlet_sample(
    std::span<const double> concentrations, RngStream& rng) {
  if (concentrations.empty()) {
    throw std::domain_error("dirichlet_sample: empty concentration vector");
  }
  for (double c : concentrations) {
    if (!(c > 0.0)) {
      throw std::domain_error("dirichlet_sample: concentrations must be > 0");
    }
  }
  std::vector<double> w(concentrations.size());
  if (w.size() == 1) {
    w[0] = 1.0;
    return w;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = rng.gamma(concentrations[i]);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

}  // namespace popsel
