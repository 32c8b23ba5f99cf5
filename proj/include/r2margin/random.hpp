#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>

namespace r2margin {

/// Stable 64-bit FNV-1a hash, used to key streams by scenario label.
std::uint64_t hash_label(std::string_view label) noexcept;

/// Counter-based pseudo-random stream. Output i is the splitmix64 finalizer
/// applied to key + i * golden-gamma, so any (seed, label, replicate) triple
/// names an independent stream without shared state.
///
/// Satisfies UniformRandomBitGenerator. A stream is single-owner.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}
  RandomStream(std::uint64_t master_seed, std::uint64_t label_hash, std::uint64_t replicate) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;

  std::uint64_t key() const noexcept { return key_; }

 private:
  friend double sample_standard_normal(RandomStream& stream) noexcept;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

/// Marsaglia polar method; the second variate of each pair is cached on the
/// stream.
double sample_standard_normal(RandomStream& stream) noexcept;

}  // namespace r2margin
