#pragma once

// Counter-based random streams (Philox4x32-10, Salmon et al., SC'11).
// A stream is addressed by (master seed, realization, substream); its
// output depends on nothing else, so the same stream yields the same
// numbers regardless of which worker consumes it or in what order.

#include <array>
#include <cstdint>

namespace stmax {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32 block with 10 rounds.
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

struct StreamId {
  std::uint64_t seed = 0;
  std::uint32_t realization = 0;
  std::uint32_t substream = 0;
};

class RandomStream {
 public:
  explicit RandomStream(StreamId id) noexcept;

  const StreamId& id() const noexcept { return id_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal via Box-Muller.
  double normal() noexcept;
  /// Unit-rate exponential.
  double exponential() noexcept;

 private:
  std::uint32_t next_u32() noexcept;

  StreamId id_;
  PhiloxKey key_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace stmax
