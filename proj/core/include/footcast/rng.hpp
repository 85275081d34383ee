#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based randomness. Every draw is a pure function of a key built from
// named integers (seed, step, member, ...), so results never depend on the
// order in which work is executed.
namespace footcast::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t key(std::uint64_t seed) noexcept { return splitmix64(seed); }

template <typename... Rest>
constexpr std::uint64_t key(std::uint64_t seed, std::uint64_t part, Rest... rest) noexcept {
  return key(splitmix64(seed ^ splitmix64(part + 0x632be59bd9b4e019ULL)),
             static_cast<std::uint64_t>(rest)...);
}

// Uniform in [0, 1) with 53 random bits.
inline double uniform01(std::uint64_t k) noexcept {
  return static_cast<double>(splitmix64(k) >> 11) * 0x1.0p-53;
}

inline double uniform(std::uint64_t k, double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform01(k);
}

// Standard normal via Box-Muller on two derived uniforms.
inline double normal(std::uint64_t k) noexcept {
  const double u1 = 1.0 - uniform01(key(k, 1));  // (0, 1]
  const double u2 = uniform01(key(k, 2));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential view over a keyed stream, for bulk draws inside one routine.
class Stream {
 public:
  explicit Stream(std::uint64_t base) noexcept : base_(base) {}

  double uniform01() noexcept { return rng::uniform01(key(base_, counter_++)); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }
  double normal() noexcept { return rng::normal(key(base_, counter_++)); }
  std::uint64_t next_u64() noexcept { return splitmix64(key(base_, counter_++)); }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace footcast::rng
