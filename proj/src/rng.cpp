#include "btmc/rng.hpp"

#include <cmath>

namespace btmc {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline Philox4x32::Block round_once(const Philox4x32::Block& c, std::uint32_t k0,
                                    std::uint32_t k1) {
  std::uint32_t hi0, lo0, hi1, lo1;
  mulhilo(kPhiloxM0, c[0], hi0, lo0);
  mulhilo(kPhiloxM1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

}  // namespace

Philox4x32::Block Philox4x32::operator()(const Block& counter) const {
  Block c = counter;
  std::uint32_t k0 = key0, k1 = key1;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    c = round_once(c, k0, k1);
  }
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t SampleKey::fold(std::uint32_t role) const {
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ (static_cast<std::uint64_t>(run_id) << 32 | replicate));
  h = mix64(h ^ (static_cast<std::uint64_t>(level) << 32 | attempt));
  h = mix64(h ^ sample);
  h = mix64(h ^ role);
  return h;
}

namespace {
inline double bits_to_u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
  // (v >> 11) in [0, 2^53); offset by 1/2 so the result is strictly inside (0,1)
  return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

double RngStream::u01_at(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                         std::uint32_t c3) const {
  const auto b = philox_({c0, c1, c2, c3});
  return bits_to_u01(b[0], b[1]);
}

std::array<double, 2> RngStream::u01x2_at(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                                          std::uint32_t c3) const {
  const auto b = philox_({c0, c1, c2, c3});
  return {bits_to_u01(b[0], b[1]), bits_to_u01(b[2], b[3])};
}

double RngStream::next_u01() {
  const std::uint64_t c = cursor_++;
  return u01_at(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), 0, 0);
}

double RngStream::next_gaussian() {
  for (;;) {
    const std::uint64_t c = cursor_++;
    const auto u = u01x2_at(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                            0, 1);
    const double x = 2.0 * u[0] - 1.0;
    const double y = 2.0 * u[1] - 1.0;
    const double s = x * x + y * y;
    if (s > 0.0 && s < 1.0) return x * std::sqrt(-2.0 * std::log(s) / s);
  }
}

}  // namespace btmc
