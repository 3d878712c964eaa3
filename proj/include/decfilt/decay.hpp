#ifndef DECFILT_DECAY_HPP
#define DECFILT_DECAY_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "decfilt/random.hpp"

namespace decfilt {

namespace decay {

/// g(t) = 1/T over the whole history.
struct Uniform {};
/// Uniform over the last `width` slices.
struct FixedWindow {
  std::size_t width = 1;
};
/// g(t) proportional to exp(-rate * (T - t)).
struct Exponential {
  double rate = 1.0;
};
/// g(t) proportional to (T - t + 1)^-(1 + exponent). exponent = 1 is quadratic decay.
struct InversePolynomial {
  double exponent = 1.0;
};

using Variant = std::variant<Uniform, FixedWindow, Exponential, InversePolynomial>;

}  // namespace decay

/// Distribution over timeslices [1..T] used to pick the Gibbs update site.
///
/// Every family depends on t only through the age k = T - t + 1, so the
/// sampler keeps a cumulative table over ages. Growing T appends to the table
/// and never invalidates what is already there. With an evidence limit L, ages
/// beyond L get weight zero.
class DecaySchedule {
 public:
  static constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

  DecaySchedule() : DecaySchedule(decay::InversePolynomial{1.0}) {}
  explicit DecaySchedule(decay::Variant variant, std::size_t limit = kUnbounded);

  static DecaySchedule quadratic() { return DecaySchedule(decay::InversePolynomial{1.0}); }

  const decay::Variant& variant() const { return variant_; }
  std::size_t limit() const { return limit_; }

  /// Unnormalized weight of slice t (1-based) at history length T.
  double raw_weight(std::size_t t, std::size_t T) const;

  /// Sum of raw_weight over t = 1..T.
  double normalizer(std::size_t T) const;

  /// Draws t in [1..T] with probability raw_weight(t, T) / normalizer(T).
  std::size_t sample(std::size_t T, Rng& rng);

  /// Largest age with positive weight at history length T.
  std::size_t support(std::size_t T) const;

  /// Canonical text form, e.g. "poly:1" or "window:5"; parse(label()) round-trips.
  std::string label() const;

  /// Parses `uniform|window:W|exp:BETA|poly:DELTA`; `limit` is applied on top.
  static DecaySchedule parse(const std::string& text, std::size_t limit = kUnbounded);

 private:
  double age_weight(std::size_t age) const;
  void extend_cumulative(std::size_t ages);

  decay::Variant variant_;
  std::size_t limit_;
  std::vector<double> cumulative_;  // cumulative_[k-1] = sum of age weights 1..k
};

}  // namespace decfilt

#endif  // DECFILT_DECAY_HPP
