#pragma once

#include <cmath>
#include <cstdint>

namespace mod1 {

// Counter-based generator (splitmix64). The state walks a fixed odd increment and the
// output is a finalizer of the counter, so streams derived from (seed, stream id) pairs
// are independent and the sequence is identical on every platform. std::* distributions
// are implementation-defined, which is why the uniform and Gaussian draws are spelled
// out here instead.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "splitmix64-v1";

  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  // Independent stream for a given master seed and stream index.
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(mix(master_seed) ^ mix(stream_id ^ 0x632be59bd9b4e019ull));
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Box-Muller, cosine branch only; one value per two uniform draws.
  double gaussian() {
    double u1 = 1.0 - uniform01();  // (0, 1], keeps the log finite
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace mod1
