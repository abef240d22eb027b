#ifndef TRAJSEL_RNG_HPP
#define TRAJSEL_RNG_HPP

#include <cmath>
#include <cstdint>

namespace trajsel {

/// Counter-based deterministic generator with cheap stream splitting.
///
/// A stream is identified by a 64-bit key; draws advance a counter and hash
/// (key, counter) through the splitmix64 finalizer. fork(tag) derives an
/// independent child stream without touching the parent, so run/branch
/// streams are reproducible from (seed, tag path) alone. The full state is
/// two words, which makes checkpoints trivial.
class Rng {
 public:
  struct State {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;
    friend bool operator==(const State&, const State&) = default;
  };

  Rng() = default;
  explicit Rng(std::uint64_t seed) : state_{mix(seed ^ kGolden), 0} {}
  explicit Rng(State s) : state_(s) {}

  /// Derives an independent stream; the parent is not advanced.
  [[nodiscard]] Rng fork(std::uint64_t tag) const {
    return Rng(State{mix(state_.key + kGolden * (tag + 1)), 0});
  }

  std::uint64_t next_u64() {
    state_.counter += kGolden;
    return mix(state_.key ^ state_.counter);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for n << 2^64.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller. Stateless between calls: every draw
  /// consumes exactly two uniforms, so checkpointing needs no cache.
  double next_gauss() {
    const double u1 = 1.0 - next_double();  // (0, 1]
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  [[nodiscard]] State state() const { return state_; }
  void set_state(State s) { state_ = s; }

  static std::uint64_t mix(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  State state_;
};

}  // namespace trajsel

#endif
