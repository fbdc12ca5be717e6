#include "favor/rng.hpp"

#include <cmath>
#include <numbers>

namespace favor {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> PhiloxEngine::block(std::array<std::uint32_t, 4> ctr,
                                                 std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

PhiloxEngine::result_type PhiloxEngine::operator()() {
  if (lane_ == 2) {
    const auto out = block({static_cast<std::uint32_t>(block_),
                            static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(stream_),
                            static_cast<std::uint32_t>(stream_ >> 32)},
                           {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    ++block_;
    lane_ = 0;
  }
  return buffer_[lane_++];
}

double PhiloxEngine::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>((*this)() >> 11) + 0.5) * kScale;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream RngStream::substream(std::uint64_t index) const {
  return RngStream(master_seed_, mix64(mix64(stream_id_) ^ (index * 0xd1342543de82ef95ull + 1)));
}

double NormalSampler::operator()() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = engine_.uniform();
  const double u2 = engine_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace favor
