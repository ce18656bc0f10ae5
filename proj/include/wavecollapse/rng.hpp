#pragma once

#include <cstdint>
#include <random>

namespace wavecollapse {

// Random streams
// --------------
// Every trajectory owns a std::mt19937_64 engine. Its output sequence is fixed
// by the C++ standard, so streams are identical across platforms and
// compilers. Engines are seeded through SplitMix64 (Steele, Lea & Flood 2014)
// so that nearby seeds give unrelated streams, and a trajectory's seed is
// derived from (master seed, trajectory index) alone, independent of thread
// scheduling.

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t index) noexcept {
  return splitmix64(master_seed ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Uniform double in [0, 1) from the top 53 bits of one engine draw.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wavecollapse
