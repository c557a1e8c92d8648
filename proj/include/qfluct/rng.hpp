#pragma once

// Counter-based random numbers: Philox4x32-10 keyed by the master seed, with the
// trajectory index in the upper counter words. A stream depends only on
// (seed, index), never on scheduling.

#include <array>
#include <cstdint>

namespace qfluct {

inline constexpr const char* kRngName = "philox4x32-10";

struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key);
};

class TrajectoryRng {
 public:
  TrajectoryRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int used_ = 4;
};

}  // namespace qfluct
