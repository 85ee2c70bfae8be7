#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace metasched {

/// Seeded pseudo-random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and normal variates are derived here rather than through
/// <random> distributions, whose algorithms are implementation-defined, so a
/// seed reproduces the same draws with any standard library.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+polar/v1";

  /// Well-known stream tags used by the meta loop.
  enum class Stream : std::uint64_t {
    kSampling = 1,
    kTraining = 2,
    kEvaluation = 3,
  };

  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, Stream stream);
  Rng(std::uint64_t seed, std::uint64_t stream_tag);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal (Marsaglia polar method).
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_tag() const noexcept { return stream_tag_; }

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_ && a.has_spare_ == b.has_spare_ &&
           (!a.has_spare_ || a.spare_ == b.spare_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_tag_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to decorrelate (seed, stream) pairs.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace metasched
