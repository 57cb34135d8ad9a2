#pragma once

#include <array>
#include <cstdint>

namespace biasaudit {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output
/// is a pure function of (counter, key), so streams are reproducible on any
/// platform and any implementation of the same algorithm.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

/// Standard normal deviates from one Philox stream via Box-Muller.
/// Block i of stream s for seed k is Philox(ctr = {i_lo, i_hi, s, 0},
/// key = {k_lo, k_hi}); each block yields two uniforms on (0, 1) with 53-bit
/// resolution and hence two normals.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint32_t stream);

  double next();

 private:
  std::uint64_t seed_;
  std::uint32_t stream_;
  std::uint64_t block_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace biasaudit
