#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace netrecon {

/// SplitMix64 output function. Used both as the core generator step and
/// for deriving independent sub-stream seeds from a master seed.
constexpr std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// Counter-based seed derivation: fold the stream ids into the master
/// seed one mix at a time. Distinct id tuples give independent streams,
/// so trials and per-node noise can be generated in any order (or in
/// parallel) with identical results.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> ids) {
  std::uint64_t h = splitmix64_mix(master + kGolden);
  for (std::uint64_t id : ids) {
    h = splitmix64_mix((h ^ id) + kGolden);
  }
  return h;
}

/// Deterministic PRNG (SplitMix64). All distributions are hand-rolled so
/// that streams are bit-identical across standard libraries and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return splitmix64_mix(state_);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound) {
    // Modulo bias is negligible for the small bounds used here.
    return next_u64() % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (cached spare).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Index into a probability vector (probabilities need not be
  /// normalized exactly; the last bucket absorbs rounding).
  int categorical(std::span<const double> probs) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace netrecon
