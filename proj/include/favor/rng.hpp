#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace favor {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The key is the
// 64-bit master seed; the 128-bit counter holds (block index, stream id), so
// every stream is an independent, random-access sequence.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t key, std::uint64_t stream_id) : key_(key), stream_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform double in the open interval (0, 1), 53 bits.
  double uniform();

  // Skip to the given 128-bit block (two 64-bit outputs per block).
  void seek_block(std::uint64_t block) {
    block_ = block;
    lane_ = 2;
  }

  // One raw Philox4x32-10 evaluation; exposed for known-answer testing.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

 private:
  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int lane_ = 2;
};

// SplitMix64 finalizer; used to derive child stream ids and seeds.
std::uint64_t mix64(std::uint64_t x);

// Identifies an independent random sequence. Value type: every sampling
// function that takes an RngStream starts from the beginning of the stream, so
// results are pure functions of (master_seed, stream_id, shape).
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : master_seed_(master_seed), stream_id_(stream_id) {}

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  // Deterministic child stream; distinct indices give distinct streams.
  RngStream substream(std::uint64_t index) const;

  PhiloxEngine engine() const { return PhiloxEngine(master_seed_, stream_id_); }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t stream_id_ = 0;
};

// Standard normal deviates by the Box-Muller transform, consuming two
// uniforms per pair.
class NormalSampler {
 public:
  explicit NormalSampler(PhiloxEngine engine) : engine_(engine) {}

  double operator()();

 private:
  PhiloxEngine engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace favor
