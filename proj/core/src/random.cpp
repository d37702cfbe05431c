#include "infervar/random.hpp"

#include <cmath>
#include <numbers>

#include "infervar/error.hpp"

namespace infervar {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace

PhiloxEngine::PhiloxEngine(const RandomStream& stream)
    : key_{static_cast<std::uint32_t>(stream.master_seed),
           static_cast<std::uint32_t>(stream.master_seed >> 32)},
      counter_{0u, 0u, static_cast<std::uint32_t>(stream.stream_index),
               static_cast<std::uint32_t>(stream.stream_index >> 32)} {}

void PhiloxEngine::refill() {
  block_ = philox4x32_10(counter_, key_);
  if (++counter_[0] == 0) ++counter_[1];
  used_ = 0;
}

std::uint32_t PhiloxEngine::next_u32() {
  if (used_ == 4) refill();
  return block_[used_++];
}

std::uint64_t PhiloxEngine::next_u64() {
  const std::uint64_t hi = next_u32();
  return (hi << 32) | next_u32();
}

double PhiloxEngine::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double PhiloxEngine::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_gaussian_;
  }
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_gaussian_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> gaussian_sample(const RandomStream& stream, std::size_t count,
                                    double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ValidationError("noise sigma must be finite and >= 0, got " + std::to_string(sigma));
  }
  std::vector<double> out(count, 0.0);
  if (sigma == 0.0) return out;
  PhiloxEngine engine(stream);
  for (double& v : out) v = sigma * engine.next_gaussian();
  return out;
}

std::vector<std::uint8_t> bernoulli_mask(const RandomStream& stream, std::size_t count,
                                         double keep_prob) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ValidationError("keep probability must be in (0, 1], got " +
                          std::to_string(keep_prob));
  }
  std::vector<std::uint8_t> out(count);
  PhiloxEngine engine(stream);
  for (auto& bit : out) bit = engine.next_unit() < keep_prob ? 1 : 0;
  return out;
}

}  // namespace infervar
