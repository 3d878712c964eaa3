#ifndef DECFILT_RANDOM_HPP
#define DECFILT_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>

namespace decfilt {

using Rng = std::mt19937_64;

/// Independent stream `index` derived from `root`. Chains that must not share
/// randomness take distinct indices from the same root.
inline Rng make_stream(std::uint64_t root, std::uint64_t index = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(root), static_cast<std::uint32_t>(root >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

/// Draws an index proportional to `weights` (unnormalized, nonnegative, positive sum).
inline int sample_categorical(std::span<const double> weights, double total, Rng& rng) {
  double target = uniform01(rng) * total;
  int last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    if (target < weights[i]) return last_positive;
    target -= weights[i];
  }
  // rounding residue
  return last_positive;
}

inline int sample_categorical(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  return sample_categorical(weights, total, rng);
}

}  // namespace decfilt

#endif  // DECFILT_RANDOM_HPP
