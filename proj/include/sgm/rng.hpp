#pragma once

#include <cstdint>
#include <random>

namespace sgm {

// Seeded generator wrapper. The raw mt19937_64 stream is pinned by the
// standard, and the derived draws below avoid std::uniform_*_distribution,
// whose output is implementation-defined; identical seeds therefore give
// identical runs on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // uniform in {0, ..., n-1}, unbiased via rejection
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t z;
    do {
      z = eng_();
    } while (z >= limit);
    return z % n;
  }

  bool coin() { return eng_() >> 63; }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sgm
