#ifndef DECFILT_PFILTER_HPP
#define DECFILT_PFILTER_HPP

#include <concepts>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "decfilt/models.hpp"
#include "decfilt/random.hpp"

namespace decfilt {

/// What the bootstrap particle filter needs from a model.
template <class M>
concept SimulableModel = requires(const M& m, Rng& rng, const typename M::State& s,
                                  const typename M::Observation& y) {
  { m.sample_initial(rng) } -> std::convertible_to<typename M::State>;
  { m.sample_transition(s, rng) } -> std::convertible_to<typename M::State>;
  { m.observation_likelihood(s, y) } -> std::convertible_to<double>;
};

/// All importance weights vanished at step `t` (1-based).
class ParticleCollapse : public std::runtime_error {
 public:
  explicit ParticleCollapse(std::size_t t)
      : std::runtime_error("particle collapse at t=" + std::to_string(t)), t_(t) {}
  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

template <class State>
struct ParticleSet {
  std::vector<State> particles;
  std::vector<double> weights;
  std::size_t steps = 0;  ///< observations absorbed so far

  std::size_t size() const { return particles.size(); }
};

/// Systematic resampling: one uniform offset, N evenly spaced pointers into
/// the cumulative weights. Returns the selected ancestor indices.
inline std::vector<std::size_t> systematic_resample(std::span<const double> weights, Rng& rng) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> ancestors(n);
  if (n == 0) return ancestors;
  double total = 0.0;
  for (double w : weights) total += w;
  const double spacing = total / static_cast<double>(n);
  double pointer = uniform01(rng) * spacing;
  double cumulative = weights[0];
  std::size_t i = 0;
  for (std::size_t j = 0; j < n; ++j) {
    while (pointer >= cumulative && i + 1 < n) cumulative += weights[++i];
    ancestors[j] = i;
    pointer += spacing;
  }
  return ancestors;
}

template <SimulableModel M>
ParticleSet<typename M::State> pf_init(const M& model, std::size_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("pf_init: need at least one particle");
  ParticleSet<typename M::State> ps;
  ps.particles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ps.particles.push_back(model.sample_initial(rng));
  ps.weights.assign(n, 1.0 / static_cast<double>(n));
  return ps;
}

/// Absorbs one observation: propagate, weight, normalize, resample. The first
/// call weights the initial draws directly (they already represent X_1).
template <SimulableModel M>
void pf_step(ParticleSet<typename M::State>& ps, const M& model,
             const typename M::Observation& y, Rng& rng) {
  const std::size_t n = ps.size();
  if (ps.steps > 0) {
    for (auto& p : ps.particles) p = model.sample_transition(p, rng);
  }
  ++ps.steps;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ps.weights[i] = model.observation_likelihood(ps.particles[i], y);
    total += ps.weights[i];
  }
  if (!(total > 0.0)) throw ParticleCollapse(ps.steps);
  for (double& w : ps.weights) w /= total;
  const auto ancestors = systematic_resample(ps.weights, rng);
  std::vector<typename M::State> next;
  next.reserve(n);
  for (std::size_t a : ancestors) next.push_back(ps.particles[a]);
  ps.particles = std::move(next);
  ps.weights.assign(n, 1.0 / static_cast<double>(n));
}

/// Weighted histogram of integer-valued particles.
inline Belief pf_belief(const ParticleSet<int>& ps, int n_states) {
  if (ps.size() == 0) throw std::invalid_argument("pf_belief: empty particle set");
  std::vector<double> p(n_states, 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i) p.at(ps.particles[i]) += ps.weights[i];
  return normalized(std::move(p));
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Weighted mean and variance of proj(particle).
template <class State, class Proj>
Moments pf_moments(const ParticleSet<State>& ps, Proj proj) {
  if (ps.size() == 0) throw std::invalid_argument("pf_moments: empty particle set");
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    wsum += ps.weights[i];
    mean += ps.weights[i] * proj(ps.particles[i]);
  }
  mean /= wsum;
  double var = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double d = proj(ps.particles[i]) - mean;
    var += ps.weights[i] * d * d;
  }
  return {mean, var / wsum};
}

/// DiscreteHMM viewed through the particle filter's contract.
class HmmSimulator {
 public:
  using State = int;
  using Observation = int;

  explicit HmmSimulator(const DiscreteHMM& model) : model_(&model) {}

  int sample_initial(Rng& rng) const { return sample_categorical(model_->prior_table(), rng); }
  int sample_transition(int x, Rng& rng) const {
    const auto k = static_cast<std::size_t>(model_->n_states());
    return sample_categorical({model_->transition_table().data() + x * k, k}, rng);
  }
  double observation_likelihood(int x, int y) const { return model_->observation(x, y); }

 private:
  const DiscreteHMM* model_;
};

static_assert(SimulableModel<HmmSimulator>);

/// Runs a fresh filter over `evidence` and returns the final belief.
inline Belief particle_filter(const DiscreteHMM& model, const EvidenceSequence& evidence,
                              std::size_t n, Rng& rng) {
  HmmSimulator sim(model);
  auto ps = pf_init(sim, n, rng);
  if (evidence.empty()) return pf_belief(ps, model.n_states());
  for (int y : evidence) pf_step(ps, sim, y, rng);
  return pf_belief(ps, model.n_states());
}

}  // namespace decfilt

#endif  // DECFILT_PFILTER_HPP
