#pragma once

#include <cstdint>
#include <limits>

namespace rcrs {

// Purpose tags used when deriving sub-streams. Values are part of the
// reproducibility contract; do not renumber.
enum class Purpose : std::uint64_t {
  kTrial = 1,
  kTables = 2,
  kTimes = 3,
  kChoices = 4,
  kCoins = 5,
  kEstimate = 6,
  kActivity = 7,
  kCoupled = 8,
  kPermutation = 9,
  kInstance = 10,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Keyed SplitMix64 stream. Streams are cheap values; derive() produces an
// independent child keyed by (parent key, tag, indices) without consuming
// any output of the parent.
class Stream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit Stream(std::uint64_t key = 0) : key_(splitmix64(key)), state_(key_) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo,hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (lo,hi].
  double uniform_open_closed(double lo, double hi) { return hi - (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0,n) by rejection (n > 0).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  Stream derive(Purpose tag, std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                std::uint64_t i2 = 0) const {
    std::uint64_t k = splitmix64(key_ ^ splitmix64(static_cast<std::uint64_t>(tag)));
    k = splitmix64(k ^ splitmix64(i0 + 0x632BE59BD9B4E019ULL));
    k = splitmix64(k ^ splitmix64(i1 + 0x8CB92BA72F3D8DD7ULL));
    k = splitmix64(k ^ splitmix64(i2 + 0xD6E8FEB86659FD93ULL));
    return Stream::from_key(k);
  }

  std::uint64_t key() const { return key_; }

 private:
  static Stream from_key(std::uint64_t k) {
    Stream s;
    s.key_ = k;
    s.state_ = k;
    return s;
  }

  std::uint64_t key_;
  std::uint64_t state_;
};

}  // namespace rcrs
