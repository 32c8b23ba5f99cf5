#include "r2margin/random.hpp"

#include <cmath>

namespace r2margin {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t label_hash,
                           std::uint64_t replicate) noexcept
    : key_(mix64(mix64(mix64(master_seed) ^ label_hash) + replicate * kGoldenGamma)) {}

RandomStream::result_type RandomStream::operator()() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGoldenGamma);
}

double RandomStream::uniform() noexcept {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_standard_normal(RandomStream& stream) noexcept {
  if (stream.spare_normal_) {
    const double z = *stream.spare_normal_;
    stream.spare_normal_.reset();
    return z;
  }
  double u, v, s;
  do {
    u = 2.0 * stream.uniform() - 1.0;
    v = 2.0 * stream.uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  stream.spare_normal_ = v * scale;
  return u * scale;
}

}  // namespace r2margin
