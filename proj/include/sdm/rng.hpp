#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sdm {

// All randomness in the library flows through these helpers. std::
// distributions are implementation-defined, so seeded runs would not be
// reproducible across standard libraries; splitmix64 plus explicit
// transforms is.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller. One draw per call so replay does not
  // depend on how calls pair up.
  double next_normal() {
    double u1;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  // Uniform index in [0, n). Multiply-shift keeps it platform-independent.
  std::size_t next_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Child stream; distinct tags give decorrelated streams without
  // advancing the parent.
  Rng branch(std::uint64_t tag) const {
    std::uint64_t s = state_ ^ (0xbf58476d1ce4e5b9ULL * (tag + 1));
    splitmix64(s);
    return Rng(s);
  }

 private:
  std::uint64_t state_;
};

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.next_index(i);
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

// Stateless hash of (seed, index) to [0, 1). Used by the random query
// strategy: the score of a sample must not depend on scoring order.
inline double hash_to_unit(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (index + 0x9e3779b97f4a7c15ULL);
  h = splitmix64(s);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 14695981039346656037ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace sdm
