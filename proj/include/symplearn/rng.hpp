//! @file rng.hpp
//! @brief Deterministic, splittable random number generation.
//!
//! All randomness in the library flows through Xoshiro256pp seeded via
//! SplitMix64.  Streams are derived from a single master seed together with a
//! (stream tag, index) pair, so independent trials and independent roles
//! inside a trial get decorrelated streams with a documented derivation:
//!
//!     state[i] = splitmix64_chain(master ^ GOLDEN*(tag+1) ^ MIX*(index+1))
//!
//! This makes every run of an experiment bit-reproducible from
//! (config, master_seed) regardless of thread scheduling, and avoids the
//! platform-dependence of the standard library's normal_distribution.

#ifndef SYMPLEARN_RNG_HPP
#define SYMPLEARN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace symplearn {

//! SplitMix64 step: the standard 64-bit finalizer used for seeding.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

//! Stream roles; combined with a trial index they name an RNG stream.
enum class Stream : std::uint64_t {
  instance = 1,   //!< drawing the hidden (r*, S*) instance
  probe = 2,      //!< measurement sampling during learning
  analysis = 3,   //!< auxiliary draws (perturbations, checks)
  harness = 4     //!< anything the experiment driver needs
};

//! xoshiro256++ generator (Blackman & Vigna), with Box-Muller normals.
class Xoshiro256pp {
public:
  //! Seed directly from a single 64-bit value.
  explicit Xoshiro256pp(std::uint64_t seed = 0x853C49E6748FEA9BULL) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  //! Derive the stream for (master seed, role tag, index).
  static Xoshiro256pp derive(std::uint64_t master, Stream tag, std::uint64_t index) {
    const std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
    const std::uint64_t mix = 0xD1B54A32D192ED03ULL;
    std::uint64_t seed = master ^ (golden * (static_cast<std::uint64_t>(tag) + 1)) ^
                         (mix * (index + 1));
    return Xoshiro256pp(seed);
  }

  //! Next raw 64-bit output.
  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  //! Uniform double in (0, 1]: 53 random bits, never exactly 0 (safe for log).
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  //! Uniform double in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
  }

  //! Standard normal via Box-Muller (pairwise, one value cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace symplearn

#endif // SYMPLEARN_RNG_HPP
