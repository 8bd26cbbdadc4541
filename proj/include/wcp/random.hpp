#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace wcp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The output
// block is a pure function of (key, counter), which is what lets every Monte
// Carlo replication own an independent stream addressed by its index.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

// Default seed used by the tools when none is given.
inline constexpr std::uint64_t kDefaultSeed = 20240607ULL;

// Stable 64-bit identifier for a named stream family, optionally refined by
// integer coordinates (grid point, gamma index, ...).
std::uint64_t stream_id(std::string_view tag, std::uint64_t a = 0,
                        std::uint64_t b = 0) noexcept;

// Random stream addressed by (seed, stream, substream). The key is derived
// from seed and stream; the substream (usually the replication index) fills
// the high half of the counter and the low half counts blocks. Two streams
// with different addresses never share a counter/key pair.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream,
               std::uint64_t substream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept;

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  // Standard normal deviate (Box-Muller; the second value of each pair is
  // cached).
  double normal() noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_{};
  std::uint64_t substream_ = 0;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int cursor_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace wcp
