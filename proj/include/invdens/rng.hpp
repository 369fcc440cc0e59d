#pragma once

// Counter-based random streams (Philox4x32-10).
//
// A stream is identified by (seed, stream id). Both live in the key/counter
// of the block cipher, so stream k of a given seed is the same sequence no
// matter which worker produces it or in which order streams are consumed.

#include <array>
#include <cstdint>
#include <limits>

namespace invdens::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

namespace detail {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr Block philox_round(const Block& c, const Key& k)
{
  const std::uint64_t p0 = std::uint64_t{ kMul0 } * c[0];
  const std::uint64_t p1 = std::uint64_t{ kMul1 } * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return { hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0 };
}

} // namespace detail

//! The Philox4x32 bijection with 10 rounds.
constexpr Block philox4x32_10(Block counter, Key key)
{
  counter = detail::philox_round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += detail::kWeyl0;
    key[1] += detail::kWeyl1;
    counter = detail::philox_round(counter, key);
  }
  return counter;
}

//! Identifies one independent stream under a master seed.
struct StreamId
{
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

//! Stream id for replication `replication` of sweep row `row`.
constexpr StreamId replication_stream(std::uint64_t seed,
                                      std::uint32_t row,
                                      std::uint32_t replication)
{
  return { seed, (std::uint64_t{ row } << 32) | replication };
}

//! UniformRandomBitGenerator over a single Philox stream.
class Philox
{
public:
  using result_type = std::uint32_t;

  explicit Philox(StreamId id)
    : key_{ static_cast<std::uint32_t>(id.seed),
            static_cast<std::uint32_t>(id.seed >> 32) }
    , stream_lo_(static_cast<std::uint32_t>(id.stream))
    , stream_hi_(static_cast<std::uint32_t>(id.stream >> 32))
  {}

  Philox(std::uint64_t seed, std::uint64_t stream)
    : Philox(StreamId{ seed, stream })
  {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()()
  {
    if (used_ == 4) {
      buffer_ = philox4x32_10(counter_block(), key_);
      ++block_;
      used_ = 0;
    }
    return buffer_[used_++];
  }

  //! Skips `n` 32-bit outputs.
  void discard(std::uint64_t n)
  {
    while (n > 0 && used_ < 4) {
      ++used_;
      --n;
    }
    block_ += n / 4;
    const auto rest = static_cast<unsigned>(n % 4);
    if (rest > 0) {
      buffer_ = philox4x32_10(counter_block(), key_);
      ++block_;
      used_ = rest;
    }
  }

private:
  Block counter_block() const
  {
    return { static_cast<std::uint32_t>(block_),
             static_cast<std::uint32_t>(block_ >> 32),
             stream_lo_,
             stream_hi_ };
  }

  Key key_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint64_t block_ = 0;
  Block buffer_{};
  unsigned used_ = 4;
};

} // namespace invdens::rng
