#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace infervar {

/// Names one independent random sequence: the pair (master_seed, stream_index)
/// selects a Philox4x32-10 key and counter block, so any stream can be
/// regenerated on any worker without replaying the others.
struct RandomStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;

  friend bool operator==(const RandomStream&, const RandomStream&) = default;
};

/// Counter-based generator positioned at the start of a RandomStream.
class PhiloxEngine {
 public:
  explicit PhiloxEngine(const RandomStream& stream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit();
  /// Standard normal via Box-Muller.
  double next_gaussian();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  std::size_t used_ = 4;
  double spare_gaussian_ = 0.0;
  bool has_spare_ = false;
};

/// `count` i.i.d. N(0, sigma^2) draws. Throws ValidationError for sigma < 0.
std::vector<double> gaussian_sample(const RandomStream& stream,
                                    std::size_t count, double sigma);

/// `count` i.i.d. indicators with P(1) = keep_prob, keep_prob in (0, 1].
std::vector<std::uint8_t> bernoulli_mask(const RandomStream& stream,
                                         std::size_t count, double keep_prob);

}  // namespace infervar
