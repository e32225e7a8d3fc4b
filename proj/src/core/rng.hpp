#pragma once

#include <cstdint>
#include <random>

namespace fhasel {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seeded gaussian stream. Separate stream ids keep the per-measurement noise
// sources independent while staying reproducible from one scenario seed.
class NoiseRng {
 public:
  NoiseRng(std::uint64_t seed, std::uint64_t stream)
      : eng_(splitmix64(seed ^ splitmix64(stream))) {}

  double normal() { return dist_(eng_); }

 private:
  std::mt19937_64 eng_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace fhasel
