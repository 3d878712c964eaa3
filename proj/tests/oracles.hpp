// Independent reference computations used only by tests. Nothing here calls
// into the inference code it is used to check.
#ifndef DECFILT_TESTS_ORACLES_HPP
#define DECFILT_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <vector>

#include "decfilt/models.hpp"
#include "decfilt/skf.hpp"

namespace oracle {

/// Unnormalized joint weight of (x, y) under the model, computed term by term.
inline double joint_weight(const decfilt::DiscreteHMM& m, const std::vector<int>& x,
                           const std::vector<int>& y) {
  double w = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const auto& prior = m.prior_table();
    const auto& trans = m.transition_table();
    const auto& obs = m.observation_table();
    w *= t == 0 ? prior[x[0]] : trans[x[t - 1] * m.n_states() + x[t]];
    w *= obs[x[t] * m.n_obs() + y[t]];
  }
  return w;
}

struct Enumeration {
  std::map<std::vector<int>, double> posterior;
  double evidence = 0.0;  ///< P(y_1:T)
};

/// Every trajectory by recursion, normalized by the total weight.
inline Enumeration enumerate(const decfilt::DiscreteHMM& m, const std::vector<int>& y) {
  Enumeration out;
  std::vector<int> x(y.size());
  auto rec = [&](auto&& self, std::size_t t) -> void {
    if (t == y.size()) {
      const double w = joint_weight(m, x, y);
      out.posterior[x] = w;
      out.evidence += w;
      return;
    }
    for (int s = 0; s < m.n_states(); ++s) {
      x[t] = s;
      self(self, t + 1);
    }
  };
  rec(rec, 0);
  for (auto& [k, v] : out.posterior) v /= out.evidence;
  return out;
}

/// P(X_t = . | y_1:T) from the enumeration (t 0-based).
inline std::vector<double> marginal(const Enumeration& e, std::size_t t, int n_states) {
  std::vector<double> p(n_states, 0.0);
  for (const auto& [x, w] : e.posterior) p[x[t]] += w;
  return p;
}

/// P(X_T | y_1:T) for every prefix length, via enumeration of each prefix.
inline std::vector<double> filtered_last(const decfilt::DiscreteHMM& m, const std::vector<int>& y) {
  const auto e = enumerate(m, y);
  return marginal(e, y.size() - 1, m.n_states());
}

/// Posterior mean and variance of x_T in a switching random walk: one Kalman
/// filter per switch sequence, mixed by sequence posterior weight.
struct MixtureResult {
  double mean = 0.0;
  double variance = 0.0;
};

inline MixtureResult skf_mixture_of_kalman(const decfilt::SwitchingKF& m, const std::vector<double>& ys) {
  const std::size_t T = ys.size();
  const int n = m.n_switch();
  const double qv = m.sigma_v * m.sigma_v;
  const double rw = m.sigma_w * m.sigma_w;
  std::vector<int> s(T, 0);
  double total_w = 0.0, sum_mean = 0.0, sum_second = 0.0;
  std::vector<double> log_ws;
  std::vector<double> means, vars;
  while (true) {
    double logw = 0.0;
    double mean = 0.0, var = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      double pw;
      if (t == 0) {
        pw = m.switch_prior[s[0]];
        mean = m.start_mean + m.switch_values[s[0]];
        var = m.start_std * m.start_std + qv;
      } else {
        pw = m.switch_markov ? (*m.switch_markov)[s[t - 1] * n + s[t]] : m.switch_prior[s[t]];
        mean += m.switch_values[s[t]];
        var += qv;
      }
      const double innov_var = var + rw;
      const double r = ys[t] - mean;
      logw += std::log(pw) - 0.5 * std::log(2 * std::numbers::pi * innov_var) - 0.5 * r * r / innov_var;
      const double gain = var / innov_var;
      mean += gain * r;
      var *= (1 - gain);
    }
    log_ws.push_back(logw);
    means.push_back(mean);
    vars.push_back(var);
    std::size_t pos = 0;
    while (pos < T && ++s[pos] == n) s[pos++] = 0;
    if (pos == T) break;
  }
  double best = log_ws[0];
  for (double v : log_ws) best = std::max(best, v);
  for (std::size_t i = 0; i < log_ws.size(); ++i) {
    const double w = std::exp(log_ws[i] - best);
    total_w += w;
    sum_mean += w * means[i];
    sum_second += w * (vars[i] + means[i] * means[i]);
  }
  const double mu = sum_mean / total_w;
  return {mu, sum_second / total_w - mu * mu};
}

}  // namespace oracle

#endif  // DECFILT_TESTS_ORACLES_HPP
