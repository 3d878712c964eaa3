#ifndef DECFILT_EXACT_HPP
#define DECFILT_EXACT_HPP

#include <cstddef>
#include <map>
#include <stdexcept>
#include <vector>

#include "decfilt/models.hpp"

namespace decfilt {

/// Evidence symbol with zero likelihood under every reachable state.
/// `t` is 1-based.
class ImpossibleEvidence : public std::domain_error {
 public:
  explicit ImpossibleEvidence(std::size_t t);
  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

struct FilterResult {
  std::vector<Belief> beliefs;  ///< P(X_t | y_1:t), t = 1..T
  double log_likelihood = 0.0;  ///< log P(y_1:T)
};

/// Scaled forward recursion.
FilterResult forward_filter(const DiscreteHMM& model, const EvidenceSequence& evidence);

struct SmoothedMarginals {
  std::vector<Belief> per_t;  ///< P(X_t | y_1:T), t = 1..T
};

/// Forward-backward with the forward pass's per-step normalizers.
SmoothedMarginals smooth(const DiscreteHMM& model, const EvidenceSequence& evidence);

inline constexpr double kMaxEnumeration = 1e7;

struct TrajectoryPosterior {
  std::map<Trajectory, double> probs;  ///< only trajectories with positive mass
  double log_evidence = 0.0;           ///< log of the normalizing constant
};

/// Exhaustive P(x_1:T | y_1:T). Throws std::length_error above
/// kMaxEnumeration trajectories.
TrajectoryPosterior brute_force_posterior(const DiscreteHMM& model,
                                          const EvidenceSequence& evidence);

/// Marginal of the enumerated posterior on slice t (0-based).
Belief slice_marginal(const TrajectoryPosterior& posterior, std::size_t t, int n_states);

void check_evidence(const DiscreteHMM& model, const EvidenceSequence& evidence);

/// Exact draw from P(x_1:T | y_1:T) by forward filtering, backward sampling.
Trajectory sample_posterior_trajectory(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                       Rng& rng);

}  // namespace decfilt

#endif  // DECFILT_EXACT_HPP
