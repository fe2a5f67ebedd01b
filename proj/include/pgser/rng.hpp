#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace pgser {

/// Deterministic random stream. Every random draw in the project goes through
/// this wrapper so runs with the same seed reproduce bit for bit.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform index in [0, n). Single generator call (multiply-shift).
  std::size_t next_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("next_index: n must be positive");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() { return (gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::mt19937_64 gen_;
};

namespace detail {
inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
}  // namespace detail

/// Seed for a named substream of a master seed. Distinct names give
/// statistically independent streams; the same (master, name) always maps to
/// the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  std::uint64_t h = detail::fnv1a(detail::kFnvOffset, &master, sizeof master);
  return detail::fnv1a(h, stream.data(), stream.size());
}

/// Indexed variant for per-run substreams (one stream per seed in a sweep).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index) {
  std::uint64_t h = derive_seed(master, stream);
  return detail::fnv1a(h, &index, sizeof index);
}

}  // namespace pgser
