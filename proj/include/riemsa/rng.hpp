#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace riemsa {

using Philox4x64Block = std::array<std::uint64_t, 4>;
using Philox4x64Key = std::array<std::uint64_t, 2>;

/// One Philox-4x64-10 block encryption of `counter` under `key`.
Philox4x64Block philox4x64_10(Philox4x64Block counter, Philox4x64Key key);

/// Counter-based random generator. The pair (seed, stream) selects an
/// independent substream; the n-th block of a substream is
/// philox4x64_10({n + 1, 0, 0, 0}, {seed, stream}).
///
/// Satisfies UniformRandomBitGenerator. Copying an Rng copies the full state
/// (including the cached normal variate), so a copy replays the same draws.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal variate.
  double normal();

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream() const { return key_[1]; }

 private:
  Philox4x64Key key_;
  std::uint64_t block_ = 0;
  Philox4x64Block buffer_{};
  int pos_ = 4;
  std::normal_distribution<double> normal_;
};

/// Stream id used for replicate `r` of a sweep. Replicates share nothing.
inline std::uint64_t replicate_stream(std::uint64_t r) { return r; }

}  // namespace riemsa
