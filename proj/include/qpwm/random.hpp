#pragma once

#include <cmath>
#include <cstdint>

namespace qpwm {

namespace detail {
// Fully-avalanched 64-bit mix (the splitmix64 finalizer).
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

// Seeded pseudo-random stream (splitmix64). A stream is keyed by
// (seed, stream_index); distinct indices give statistically independent
// streams, so parallel loops can draw one stream per loop index and produce
// the same numbers in any execution order. All draws are deterministic given
// the key, which the golden-file tests rely on.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0) {}

  RandomStream(std::uint64_t seed, std::uint64_t stream_index)
      : state_(detail::mix64(detail::mix64(seed ^ 0x6A09E667F3BCC909ULL) +
                             0x9E3779B97F4A7C15ULL * stream_index)) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return detail::mix64(state_);
  }

  // Uniform on the open interval (0, 1); never returns an endpoint, so it is
  // safe inside logs and inverse CDFs.
  double next_unit() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates draws in pairs.
  double next_normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Streaming FNV-1a 64-bit hash; used to fingerprint generated data in CSV
// headers so artifacts can be matched to their inputs.
class Fnv1a64 {
 public:
  void update(const void* data, std::size_t size) noexcept {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t digest() const noexcept { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t size) noexcept {
  Fnv1a64 h;
  h.update(data, size);
  return h.digest();
}

}  // namespace qpwm
