#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace pepslab {

// Stream derivation: every random stream is an mt19937_64 seeded with a
// SplitMix64 hash of (seed, stream index). mt19937_64 output is fixed by the
// C++ standard, and the two conversions below are done by hand, so samples are
// bit-identical across platforms.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, std::uint64_t stream) : eng_(derive_seed(seed, stream)) {}

  std::uint64_t next_u64() { return eng_(); }
  // uniform on [0, 1)
  double uniform();
  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n);
  double normal();
  // Re, Im ~ N(0, 1/2)
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pepslab
