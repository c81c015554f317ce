#pragma once

#include <array>
#include <cstdint>

namespace btmc {

// Philox4x32-10 counter-based generator. Streams are identified by a 64-bit
// key; draws are addressed by a 128-bit counter, so independent streams and
// random-access draws come for free. This is what makes Monte Carlo runs
// bit-reproducible under any thread count: every random quantity is a pure
// function of (master seed, replicate, level, sample, role, address).
struct Philox4x32 {
  using Block = std::array<std::uint32_t, 4>;

  std::uint32_t key0 = 0;
  std::uint32_t key1 = 0;

  explicit Philox4x32(std::uint64_t key = 0)
      : key0(static_cast<std::uint32_t>(key)),
        key1(static_cast<std::uint32_t>(key >> 32)) {}

  Block operator()(const Block& counter) const;
};

// SplitMix64 finalizer; used to fold stream identifiers into Philox keys.
std::uint64_t mix64(std::uint64_t x);

// Identifies one independent sample of the estimator pipeline.
struct SampleKey {
  std::uint64_t master_seed = 0;
  std::uint32_t run_id = 0;     // distinguishes eps runs / reference runs
  std::uint32_t replicate = 0;
  std::uint32_t level = 0;
  std::uint64_t sample = 0;
  std::uint32_t attempt = 0;    // bumped when a degenerate sample is redrawn

  std::uint64_t fold(std::uint32_t role) const;
};

// One logical random stream. Provides both addressed draws (value determined
// by an explicit 128-bit address, independent of call order) and a sequential
// mode with an internal cursor.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key) : philox_(key) {}
  RngStream(const SampleKey& key, std::uint32_t role) : philox_(key.fold(role)) {}

  // Uniform on (0,1), strictly; 53 random bits.
  double u01_at(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3) const;
  // Two independent uniforms from one block.
  std::array<double, 2> u01x2_at(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                                 std::uint32_t c3) const;

  // Sequential draws (cursor in counter word 0/1).
  double next_u01();
  double next_gaussian();  // standard normal, Marsaglia polar

 private:
  Philox4x32 philox_;
  std::uint64_t cursor_ = 0;
};

}  // namespace btmc
