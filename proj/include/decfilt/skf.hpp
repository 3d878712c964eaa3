#ifndef DECFILT_SKF_HPP
#define DECFILT_SKF_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "decfilt/decay.hpp"
#include "decfilt/pfilter.hpp"
#include "decfilt/random.hpp"

namespace decfilt {

/// Scalar switching random walk:
///   X_t = X_{t-1} + v(S_t) + N(0, sigma_v^2),  Y_t = X_t + N(0, sigma_w^2).
///
/// The walk starts from X_0 ~ N(start_mean, start_std^2), which is integrated
/// out, so X_1 | S_1 ~ N(start_mean + v(S_1), start_std^2 + sigma_v^2). S_t is
/// i.i.d. from `switch_prior` unless `switch_markov` (row-major, one row per
/// switch index) is given, in which case S_1 ~ switch_prior and S_t follows
/// the Markov rows afterwards.
struct SwitchingKF {
  std::vector<double> switch_values;
  std::vector<double> switch_prior;
  std::optional<std::vector<double>> switch_markov;
  double sigma_v = 1.0;
  double sigma_w = 1.0;
  double start_mean = 0.0;
  double start_std = 1.0;

  int n_switch() const { return static_cast<int>(switch_values.size()); }
  double switch_weight(std::optional<int> from, int to) const;
  double start_variance() const { return start_std * start_std + sigma_v * sigma_v; }
};

/// Checks shapes and normalization. With `allow_degenerate`, zero noise
/// scales are accepted (simulation only).
void validate(const SwitchingKF& model, bool allow_degenerate = false);

std::string to_json(const SwitchingKF& model);
SwitchingKF skf_from_json(const std::string& text);
SwitchingKF read_skf_file(const std::string& path);

struct HybridTrajectory {
  std::vector<double> xs;
  std::vector<int> ss;

  std::size_t size() const { return xs.size(); }
};

std::pair<HybridTrajectory, std::vector<double>> skf_simulate(const SwitchingKF& model,
                                                              std::size_t T, std::uint64_t seed);

struct Gaussian {
  double mean = 0.0;
  double std = 1.0;
};

/// Conditional of X_t given its blanket. Missing x_prev means t = 1 (start
/// term), missing x_next means t = T. x_next requires s_next.
Gaussian skf_cond_x(const SwitchingKF& model, std::optional<double> x_prev,
                    std::optional<double> x_next, int s_t, std::optional<int> s_next, double y);

/// Conditional of S_t over switch indices. Missing x_prev means t = 1.
std::vector<double> skf_cond_s(const SwitchingKF& model, std::optional<int> s_prev,
                               std::optional<int> s_next, double x_t, std::optional<double> x_prev);

struct SkfChainConfig {
  std::size_t steps_per_update = 1500;
  std::size_t burn_in = 0;
  std::size_t gap = 1;  ///< tally x_T every `gap` steps after burn-in
  DecaySchedule schedule = DecaySchedule::quadratic();
  std::uint64_t seed = 0;
};

/// Decayed MCMC over (S_t, X_t) trajectories. A step picks t from the decay
/// schedule, resamples S_t and then X_t. Tallies are running sums of x_T.
class SkfMcmcFilter {
 public:
  SkfMcmcFilter(const SwitchingKF& model, SkfChainConfig config);

  /// Appends y, initializes (s, x) for the new slice, clears tallies, runs S steps.
  void observe(double y);
  void extend(double y);

  void step();
  void run(std::size_t steps);

  /// Mean and variance of the tallied x_T values.
  Moments estimate() const;
  std::size_t tallies() const { return tally_count_; }

  void set_state(HybridTrajectory state, std::vector<double> evidence);

  std::size_t length() const { return state_.size(); }
  const HybridTrajectory& state() const { return state_; }
  const std::vector<double>& evidence() const { return evidence_; }
  std::size_t last_site() const { return last_site_; }

 private:
  void clear_tallies();

  const SwitchingKF* model_;
  SkfChainConfig config_;
  Rng rng_;
  HybridTrajectory state_;
  std::vector<double> evidence_;
  std::size_t steps_since_update_ = 0;
  std::size_t last_site_ = 0;
  std::size_t tally_count_ = 0;
  double tally_sum_ = 0.0;
  double tally_sumsq_ = 0.0;
};

/// SwitchingKF through the particle filter's contract.
class SkfSimulator {
 public:
  struct State {
    double x = 0.0;
    int s = 0;
  };
  using Observation = double;

  explicit SkfSimulator(const SwitchingKF& model) : model_(&model) {}

  State sample_initial(Rng& rng) const;
  State sample_transition(const State& p, Rng& rng) const;
  double observation_likelihood(const State& p, double y) const;

 private:
  const SwitchingKF* model_;
};

static_assert(SimulableModel<SkfSimulator>);

}  // namespace decfilt

#endif  // DECFILT_SKF_HPP
