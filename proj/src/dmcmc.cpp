#include "decfilt/dmcmc.hpp"

#include <string>

#include "decfilt/exact.hpp"

namespace decfilt {

InconsistentBlanket::InconsistentBlanket(std::size_t t)
    : std::domain_error("inconsistent Markov blanket at t=" + std::to_string(t)), t_(t) {}

double blanket_weights(const DiscreteHMM& model, std::optional<int> x_prev,
                       std::optional<int> x_next, int y, std::span<double> out) {
  const int k = model.n_states();
  double total = 0.0;
  for (int x = 0; x < k; ++x) {
    double w = x_prev ? model.transition(*x_prev, x) : model.prior(x);
    w *= model.observation(x, y);
    if (x_next) w *= model.transition(x, *x_next);
    out[x] = w;
    total += w;
  }
  return total;
}

Belief gibbs_conditional(const DiscreteHMM& model, std::size_t t, std::optional<int> x_prev,
                         std::optional<int> x_next, int y) {
  if (y < 0 || y >= model.n_obs()) throw std::out_of_range("gibbs_conditional: bad symbol");
  std::vector<double> w(model.n_states());
  const double total = blanket_weights(model, x_prev, x_next, y, w);
  if (!(total > 0.0)) throw InconsistentBlanket(t);
  for (double& v : w) v /= total;
  return Belief{std::move(w)};
}

DecayedMcmcFilter::DecayedMcmcFilter(const DiscreteHMM& model, ChainConfig config)
    : model_(&model),
      config_(std::move(config)),
      rng_(make_stream(config_.seed)),
      counts_(model.n_states(), 0),
      scratch_(model.n_states()) {
  if (config_.steps_per_update < 1) throw std::invalid_argument("chain: S must be >= 1");
  if (config_.burn_in >= config_.steps_per_update) {
    throw std::invalid_argument("chain: burn-in must be smaller than S");
  }
}

DecayedMcmcFilter::DecayedMcmcFilter(const DiscreteHMM& model, ChainConfig config,
                                     EvidenceSequence evidence, Trajectory initial)
    : DecayedMcmcFilter(model, std::move(config)) {
  check_evidence(model, evidence);
  if (initial.size() != evidence.size()) {
    throw std::invalid_argument("chain: trajectory and evidence lengths differ");
  }
  evidence_ = std::move(evidence);
  reset_trajectory(std::move(initial));
}

void DecayedMcmcFilter::reset_trajectory(Trajectory trajectory) {
  if (trajectory.size() != evidence_.size()) {
    throw std::invalid_argument("chain: trajectory and evidence lengths differ");
  }
  for (int x : trajectory) {
    if (x < 0 || x >= model_->n_states()) throw std::out_of_range("chain: state out of range");
  }
  trajectory_ = std::move(trajectory);
  clear_tallies();
}

void DecayedMcmcFilter::clear_tallies() {
  std::fill(counts_.begin(), counts_.end(), 0);
  steps_since_update_ = 0;
}

void DecayedMcmcFilter::extend(int y) {
  if (y < 0 || y >= model_->n_obs()) throw std::out_of_range("observe: invalid symbol");
  const std::size_t t = trajectory_.size() + 1;
  std::optional<int> prev;
  if (!trajectory_.empty()) prev = trajectory_.back();
  const double total = blanket_weights(*model_, prev, std::nullopt, y, scratch_);
  if (!(total > 0.0)) throw ImpossibleEvidence(t);
  evidence_.push_back(y);
  trajectory_.push_back(sample_categorical(scratch_, total, rng_));
  clear_tallies();
}

void DecayedMcmcFilter::observe(int y) {
  extend(y);
  run(config_.steps_per_update);
}

void DecayedMcmcFilter::resample(std::size_t index) {
  const std::size_t T = trajectory_.size();
  std::optional<int> prev, next;
  if (index > 0) prev = trajectory_[index - 1];
  if (index + 1 < T) next = trajectory_[index + 1];
  const double total = blanket_weights(*model_, prev, next, evidence_[index], scratch_);
  if (!(total > 0.0)) throw InconsistentBlanket(index + 1);
  trajectory_[index] = sample_categorical(scratch_, total, rng_);
}

void DecayedMcmcFilter::step() {
  const std::size_t T = trajectory_.size();
  if (T == 0) throw std::logic_error("chain: cannot step an empty history");
  last_site_ = config_.schedule.sample(T, rng_);
  resample(last_site_ - 1);
  ++steps_since_update_;
  ++total_steps_;
  if (steps_since_update_ > config_.burn_in) ++counts_[trajectory_.back()];
}

void DecayedMcmcFilter::run(std::size_t steps) {
  for (std::size_t s = 0; s < steps; ++s) step();
}

Belief DecayedMcmcFilter::estimate() const {
  std::uint64_t total = 0;
  for (auto c : counts_) total += c;
  if (total == 0) throw std::logic_error("chain: no tallied steps since the last update");
  std::vector<double> p(counts_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(counts_[i]) / total;
  return Belief{std::move(p)};
}

Trajectory greedy_forward_trajectory(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                     Rng& rng) {
  check_evidence(model, evidence);
  Trajectory xs;
  xs.reserve(evidence.size());
  std::vector<double> w(model.n_states());
  for (std::size_t t = 0; t < evidence.size(); ++t) {
    std::optional<int> prev;
    if (t > 0) prev = xs.back();
    const double total = blanket_weights(model, prev, std::nullopt, evidence[t], w);
    if (!(total > 0.0)) throw ImpossibleEvidence(t + 1);
    xs.push_back(sample_categorical(w, total, rng));
  }
  return xs;
}

}  // namespace decfilt
