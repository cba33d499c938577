#pragma once

#include <cstdint>

namespace dsinv {

// Counter-based random streams. Every stream is addressed by up to four
// 64-bit words (master seed, replication/scenario, period, purpose) and is
// stateless apart from a draw counter, so simulations can be replayed,
// paired across policies (common random numbers) and split across workers
// without coordination.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (b + kGolden + (a << 6) + (a >> 2)));
}

// Purpose tags keep draws for different uses statistically independent even
// when they share (master, replication, period) coordinates.
enum class Draw : std::uint64_t {
  kFailCm = 1,
  kFailAm = 2,
  kPolicy = 3,
  kReset = 4,
  kInit = 5,
};

class RngStream {
 public:
  RngStream(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0,
            std::uint64_t c = 0)
      : base_(combine(combine(combine(mix64(master), a), b), c)) {}

  std::uint64_t next_u64() { return mix64(base_ + counter_++ * kGolden); }

  // Uniform in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(next_uniform() * static_cast<double>(n)) %
           n;
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

// One-shot uniform for a fully addressed draw; the workhorse of the
// simulator's per-period sampling.
inline double uniform_at(std::uint64_t master, std::uint64_t rep,
                         std::uint64_t period, Draw purpose,
                         std::uint64_t index = 0) {
  std::uint64_t s = combine(combine(combine(mix64(master), rep), period),
                            static_cast<std::uint64_t>(purpose));
  return static_cast<double>(mix64(s + index * kGolden) >> 11) * 0x1.0p-53;
}

}  // namespace dsinv
