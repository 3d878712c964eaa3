#include "decfilt/exact.hpp"

#include <cmath>
#include <string>

namespace decfilt {

ImpossibleEvidence::ImpossibleEvidence(std::size_t t)
    : std::domain_error("impossible evidence at t=" + std::to_string(t)), t_(t) {}

void check_evidence(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  for (std::size_t t = 0; t < evidence.size(); ++t) {
    if (evidence[t] < 0 || evidence[t] >= model.n_obs()) {
      throw std::out_of_range("evidence symbol " + std::to_string(evidence[t]) + " at t=" +
                              std::to_string(t + 1) + " outside [0, n_obs)");
    }
  }
}

namespace {

// Scaled forward messages alpha_t (each normalized) and the per-step scale c_t.
struct ForwardPass {
  std::vector<std::vector<double>> alpha;
  std::vector<double> scale;
};

ForwardPass forward_pass(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  check_evidence(model, evidence);
  const int k = model.n_states();
  ForwardPass pass;
  pass.alpha.reserve(evidence.size());
  pass.scale.reserve(evidence.size());
  std::vector<double> predicted(model.prior_table());
  for (std::size_t t = 0; t < evidence.size(); ++t) {
    if (t > 0) {
      const auto& prev = pass.alpha.back();
      for (int j = 0; j < k; ++j) {
        double p = 0.0;
        for (int i = 0; i < k; ++i) p += prev[i] * model.transition(i, j);
        predicted[j] = p;
      }
    }
    std::vector<double> a(k);
    double c = 0.0;
    for (int j = 0; j < k; ++j) {
      a[j] = predicted[j] * model.observation(j, evidence[t]);
      c += a[j];
    }
    if (!(c > 0.0)) throw ImpossibleEvidence(t + 1);
    for (double& v : a) v /= c;
    pass.alpha.push_back(std::move(a));
    pass.scale.push_back(c);
  }
  return pass;
}

}  // namespace

FilterResult forward_filter(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  auto pass = forward_pass(model, evidence);
  FilterResult result;
  result.beliefs.reserve(pass.alpha.size());
  for (auto& a : pass.alpha) result.beliefs.push_back(Belief{std::move(a)});
  for (double c : pass.scale) result.log_likelihood += std::log(c);
  return result;
}

SmoothedMarginals smooth(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  auto pass = forward_pass(model, evidence);
  const std::size_t T = evidence.size();
  const int k = model.n_states();
  SmoothedMarginals out;
  out.per_t.resize(T);
  if (T == 0) return out;
  // beta_t scaled by 1/c_{t+1}, so alpha_t * beta_t is the smoothed marginal.
  std::vector<double> beta(k, 1.0), next(k);
  for (std::size_t t = T; t-- > 0;) {
    if (t + 1 < T) {
      for (int i = 0; i < k; ++i) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) {
          s += model.transition(i, j) * model.observation(j, evidence[t + 1]) * beta[j];
        }
        next[i] = s / pass.scale[t + 1];
      }
      beta.swap(next);
    }
    std::vector<double> m(k);
    for (int i = 0; i < k; ++i) m[i] = pass.alpha[t][i] * beta[i];
    out.per_t[t] = normalized(std::move(m));
  }
  return out;
}

TrajectoryPosterior brute_force_posterior(const DiscreteHMM& model,
                                          const EvidenceSequence& evidence) {
  check_evidence(model, evidence);
  const std::size_t T = evidence.size();
  const int k = model.n_states();
  if (std::pow(static_cast<double>(k), static_cast<double>(T)) > kMaxEnumeration) {
    throw std::length_error("brute_force_posterior: n_states^T exceeds enumeration limit");
  }
  TrajectoryPosterior out;
  Trajectory x(T, 0);
  double total = 0.0;
  std::vector<std::pair<Trajectory, double>> weights;
  while (true) {
    double w = 1.0;
    for (std::size_t t = 0; t < T && w > 0.0; ++t) {
      w *= (t == 0 ? model.prior(x[0]) : model.transition(x[t - 1], x[t])) *
           model.observation(x[t], evidence[t]);
    }
    if (w > 0.0) {
      weights.emplace_back(x, w);
      total += w;
    }
    // odometer increment
    std::size_t pos = 0;
    while (pos < T && ++x[pos] == k) x[pos++] = 0;
    if (pos == T) break;
  }
  if (!(total > 0.0)) throw ImpossibleEvidence(T);
  for (auto& [traj, w] : weights) out.probs.emplace(std::move(traj), w / total);
  out.log_evidence = std::log(total);
  return out;
}

Belief slice_marginal(const TrajectoryPosterior& posterior, std::size_t t, int n_states) {
  std::vector<double> m(n_states, 0.0);
  for (const auto& [traj, p] : posterior.probs) m[traj.at(t)] += p;
  return Belief{std::move(m)};
}

Trajectory sample_posterior_trajectory(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                       Rng& rng) {
  auto pass = forward_pass(model, evidence);
  const std::size_t T = evidence.size();
  const int k = model.n_states();
  Trajectory xs(T);
  if (T == 0) return xs;
  xs[T - 1] = sample_categorical(pass.alpha[T - 1], rng);
  std::vector<double> w(k);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (int i = 0; i < k; ++i) w[i] = pass.alpha[t][i] * model.transition(i, xs[t + 1]);
    xs[t] = sample_categorical(w, rng);
  }
  return xs;
}

}  // namespace decfilt
