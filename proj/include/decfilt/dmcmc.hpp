#ifndef DECFILT_DMCMC_HPP
#define DECFILT_DMCMC_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "decfilt/decay.hpp"
#include "decfilt/models.hpp"
#include "decfilt/random.hpp"

namespace decfilt {

/// Every state has zero weight given its Markov blanket. Cannot happen in an
/// ergodic model with a consistent trajectory, so it signals a corrupted chain.
class InconsistentBlanket : public std::domain_error {
 public:
  explicit InconsistentBlanket(std::size_t t);
  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

/// Unnormalized P(X_t | x_prev, x_next, y_t) written into `out` (size n_states);
/// returns the total. An absent x_prev uses the prior, an absent x_next drops
/// the forward factor.
double blanket_weights(const DiscreteHMM& model, std::optional<int> x_prev,
                       std::optional<int> x_next, int y, std::span<double> out);

/// Normalized single-slice Gibbs conditional. `t` (1-based) is only used for
/// error reporting.
Belief gibbs_conditional(const DiscreteHMM& model, std::size_t t, std::optional<int> x_prev,
                         std::optional<int> x_next, int y);

struct ChainConfig {
  std::size_t steps_per_update = 1000;  ///< S: Gibbs steps run by each observe()
  std::size_t burn_in = 0;              ///< B: steps after an update that are not tallied
  DecaySchedule schedule = DecaySchedule::quadratic();
  std::uint64_t seed = 0;
};

/// Decayed MCMC filter for a DiscreteHMM.
///
/// The chain holds one trajectory x_1..x_T and the evidence y_1..y_T. Each
/// Gibbs step picks a slice from the decay schedule, resamples it from its
/// blanket conditional and tallies the current value of x_T. Memory is
/// O(T + n_states) no matter how many steps are run. The model must outlive
/// the chain.
class DecayedMcmcFilter {
 public:
  DecayedMcmcFilter(const DiscreteHMM& model, ChainConfig config);

  /// Chain over fixed evidence starting from `initial`; no steps are run.
  DecayedMcmcFilter(const DiscreteHMM& model, ChainConfig config, EvidenceSequence evidence,
                    Trajectory initial);

  /// Appends y, initializes the new slice from P(x | x_T) P(y | x), clears the
  /// tallies and runs S Gibbs steps.
  void observe(int y);

  /// observe() without the S steps.
  void extend(int y);

  /// One Gibbs update.
  void step();
  void run(std::size_t steps);

  /// Tallies of x_T normalized. Throws std::logic_error before any tallied step.
  Belief estimate() const;

  /// Replaces the trajectory (same length) and clears tallies.
  void reset_trajectory(Trajectory trajectory);

  std::size_t length() const { return trajectory_.size(); }
  const Trajectory& trajectory() const { return trajectory_; }
  const EvidenceSequence& evidence() const { return evidence_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  /// Steps since the last observe() or reset.
  std::size_t steps_taken() const { return steps_since_update_; }
  std::uint64_t total_steps() const { return total_steps_; }
  const ChainConfig& config() const { return config_; }
  /// Slice chosen by the most recent step (1-based), 0 before any step.
  std::size_t last_site() const { return last_site_; }

 private:
  void resample(std::size_t index);
  void clear_tallies();

  const DiscreteHMM* model_;
  ChainConfig config_;
  Rng rng_;
  Trajectory trajectory_;
  EvidenceSequence evidence_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> scratch_;
  std::size_t steps_since_update_ = 0;
  std::uint64_t total_steps_ = 0;
  std::size_t last_site_ = 0;
};

/// Forward pass that draws each slice from P(x | x_{t-1}) P(y_t | x), i.e.
/// what a sequence of extend() calls produces.
Trajectory greedy_forward_trajectory(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                     Rng& rng);

}  // namespace decfilt

#endif  // DECFILT_DMCMC_HPP
