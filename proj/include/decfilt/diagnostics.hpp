#ifndef DECFILT_DIAGNOSTICS_HPP
#define DECFILT_DIAGNOSTICS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decfilt/decay.hpp"
#include "decfilt/models.hpp"

namespace decfilt {

/// Half the L1 distance. Throws std::invalid_argument on length mismatch.
double tv_distance(std::span<const double> p, std::span<const double> q);
inline double tv_distance(const Belief& p, const Belief& q) { return tv_distance(p.probs, q.probs); }

/// Largest TV distance between interior Gibbs conditionals for two blankets
/// sharing an observation symbol. Blankets whose conditional is undefined
/// (zero mass) are skipped.
double mixing_parameter(const DiscreteHMM& model);

/// Same maximum restricted to the symbols that occur in `evidence`.
double mixing_parameter(const DiscreteHMM& model, const EvidenceSequence& evidence);

/// A family of starting trajectories. `draw` is called once per chain with
/// that chain's private stream.
struct StartSpec {
  std::string label;
  std::function<Trajectory(Rng&)> draw;
};

/// Constant trajectories x_t = k for every state k, plus one uniformly random
/// trajectory. Stands in for the worst case over all starts.
std::vector<StartSpec> adversarial_starts(const DiscreteHMM& model, std::size_t T,
                                          std::uint64_t seed);

/// Chains started from exact posterior draws.
StartSpec posterior_start(const DiscreteHMM& model, const EvidenceSequence& evidence);

struct MixingOptions {
  double epsilon = 0.05;
  std::size_t chains = 1000;
  std::size_t max_steps = std::size_t{1} << 16;
  std::uint64_t seed = 0;
};

struct TvSample {
  std::string start_label;
  std::size_t step = 0;
  double tv = 0.0;
};

struct MixingReport {
  double epsilon = 0.0;
  std::optional<std::size_t> tau_m;  ///< empty: not mixed within budget
  std::vector<TvSample> per_step_tv;  ///< one entry per start and checkpoint
  std::vector<TvSample> worst;        ///< max over starts at each checkpoint
  std::size_t n_chains = 0;
  std::vector<std::string> start_labels;
  /// Expected TV between an R-sample histogram and the target; estimates
  /// below this level are noise.
  double bias_floor = 0.0;
};

/// Checkpoints 1, 2, 4, ... up to max_steps.
std::vector<std::size_t> geometric_checkpoints(std::size_t max_steps);

/// Runs R chains from every start over fixed evidence and, at each
/// checkpoint, measures the TV distance between the across-chain histogram of
/// x_T and the exact smoothed marginal. tau_m is the first checkpoint where
/// the worst start is below epsilon and stays below at the next checkpoint.
MixingReport estimate_mixing_time(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                  const DecaySchedule& schedule, const MixingOptions& options,
                                  const std::vector<StartSpec>& starts);

/// CSV: header `start_label,step,tv_estimate`, one row per sample, then
/// `worst` rows and a final `summary,<tau_m|not_mixed>,<epsilon>` row.
void write_mixing_csv(const MixingReport& report, std::ostream& out);

}  // namespace decfilt

#endif  // DECFILT_DIAGNOSTICS_HPP
