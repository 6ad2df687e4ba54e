#pragma once

#include <cstdint>
#include <utility>

namespace catrl {

// Counter-based generator with explicit state threading.
//
// A state is a (key, counter) pair. The n-th uniform of a stream is a pure
// function of the key and n, so a state can be copied, stored, and replayed.
// `split` derives an independent stream; algorithms give each component
// (model, agent, environment) its own stream so that the draw order inside
// each component is the only ordering contract.
class RngState {
 public:
  constexpr RngState() = default;
  explicit constexpr RngState(std::uint64_t seed) : key_(Mix(seed)) {}

  // Uniform in [0, 1) with 53 random bits, and the successor state.
  [[nodiscard]] std::pair<double, RngState> next_uniform() const {
    const std::uint64_t bits = Mix(key_ + (counter_ + 1) * kGolden);
    RngState next = *this;
    ++next.counter_;
    return {static_cast<double>(bits >> 11) * 0x1.0p-53, next};
  }

  [[nodiscard]] RngState split(std::uint64_t stream) const {
    RngState child;
    child.key_ = Mix(key_ ^ Mix(stream * kGolden + counter_ + 0x5851F42D4C957F2DULL));
    return child;
  }

  // Number of uniforms drawn from this stream so far.
  std::uint64_t draws() const { return counter_; }

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  // SplitMix64 finalizer.
  static constexpr std::uint64_t Mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream ids used by every training loop and its oracle.
inline constexpr std::uint64_t kModelStream = 1;
inline constexpr std::uint64_t kAgentStream = 2;
inline constexpr std::uint64_t kEnvStream = 3;
// Parameter initialization for function approximators.
inline constexpr std::uint64_t kInitStream = 4;

struct LoopRngs {
  RngState model;
  RngState agent;
  RngState env;

  static LoopRngs from_seed(std::uint64_t seed) {
    const RngState root(seed);
    return {root.split(kModelStream), root.split(kAgentStream),
            root.split(kEnvStream)};
  }
};

}  // namespace catrl
