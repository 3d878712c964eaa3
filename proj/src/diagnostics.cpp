#include "decfilt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <set>
#include <stdexcept>

#include "decfilt/dmcmc.hpp"
#include "decfilt/exact.hpp"

namespace decfilt {

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

namespace {

double mixing_parameter_over(const DiscreteHMM& model, const std::vector<int>& symbols) {
  const int k = model.n_states();
  double eta = 0.0;
  std::vector<std::vector<double>> conditionals;
  std::vector<double> w(k);
  for (int y : symbols) {
    conditionals.clear();
    for (int prev = 0; prev < k; ++prev) {
      for (int next = 0; next < k; ++next) {
        const double total = blanket_weights(model, prev, next, y, w);
        if (!(total > 0.0)) continue;
        std::vector<double> p(w);
        for (double& v : p) v /= total;
        conditionals.push_back(std::move(p));
      }
    }
    for (std::size_t a = 0; a < conditionals.size(); ++a) {
      for (std::size_t b = a + 1; b < conditionals.size(); ++b) {
        eta = std::max(eta, tv_distance(conditionals[a], conditionals[b]));
      }
    }
  }
  return eta;
}

}  // namespace

double mixing_parameter(const DiscreteHMM& model) {
  std::vector<int> symbols(model.n_obs());
  for (int y = 0; y < model.n_obs(); ++y) symbols[y] = y;
  return mixing_parameter_over(model, symbols);
}

double mixing_parameter(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  check_evidence(model, evidence);
  std::set<int> seen(evidence.begin(), evidence.end());
  return mixing_parameter_over(model, std::vector<int>(seen.begin(), seen.end()));
}

std::vector<StartSpec> adversarial_starts(const DiscreteHMM& model, std::size_t T,
                                          std::uint64_t seed) {
  std::vector<StartSpec> starts;
  for (int k = 0; k < model.n_states(); ++k) {
    starts.push_back({"const" + std::to_string(k), [T, k](Rng&) { return Trajectory(T, k); }});
  }
  Rng rng = make_stream(seed, 0x5eed);
  Trajectory random(T);
  std::uniform_int_distribution<int> pick(0, model.n_states() - 1);
  for (auto& x : random) x = pick(rng);
  starts.push_back({"random", [random](Rng&) { return random; }});
  return starts;
}

StartSpec posterior_start(const DiscreteHMM& model, const EvidenceSequence& evidence) {
  return {"posterior", [&model, evidence](Rng& rng) {
            return sample_posterior_trajectory(model, evidence, rng);
          }};
}

std::vector<std::size_t> geometric_checkpoints(std::size_t max_steps) {
  std::vector<std::size_t> out;
  for (std::size_t s = 1; s <= max_steps; s *= 2) out.push_back(s);
  return out;
}

MixingReport estimate_mixing_time(const DiscreteHMM& model, const EvidenceSequence& evidence,
                                  const DecaySchedule& schedule, const MixingOptions& options,
                                  const std::vector<StartSpec>& starts) {
  if (evidence.empty()) throw std::invalid_argument("estimate_mixing_time: empty evidence");
  if (options.chains < 1) throw std::invalid_argument("estimate_mixing_time: need chains >= 1");
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) {
    throw std::invalid_argument("estimate_mixing_time: epsilon must lie in (0, 1)");
  }
  const int k = model.n_states();
  const Belief target = smooth(model, evidence).per_t.back();
  const auto checkpoints = geometric_checkpoints(options.max_steps);
  const std::size_t R = options.chains;

  MixingReport report;
  report.epsilon = options.epsilon;
  report.n_chains = R;
  for (double p : target.probs) {
    report.bias_floor += 0.5 * std::sqrt(2.0 * p * (1.0 - p) / (std::numbers::pi * R));
  }
  std::vector<double> worst(checkpoints.size(), 0.0);

  ChainConfig config;
  config.steps_per_update = 1;
  config.schedule = schedule;
  for (std::size_t si = 0; si < starts.size(); ++si) {
    const auto& start = starts[si];
    report.start_labels.push_back(start.label);
    // histogram[c][x]: chains with x_T = x at checkpoint c
    std::vector<std::vector<double>> histogram(checkpoints.size(), std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r < R; ++r) {
      const std::uint64_t stream = si * R + r;
      Rng init_rng = make_stream(options.seed ^ 0xa5a5a5a5ull, stream);
      config.seed = options.seed + 0x9e3779b97f4a7c15ull * (stream + 1);
      DecayedMcmcFilter chain(model, config, evidence, start.draw(init_rng));
      std::size_t done = 0;
      for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        chain.run(checkpoints[c] - done);
        done = checkpoints[c];
        histogram[c][chain.trajectory().back()] += 1.0;
      }
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      for (double& v : histogram[c]) v /= static_cast<double>(R);
      const double tv = tv_distance(histogram[c], target.probs);
      report.per_step_tv.push_back({start.label, checkpoints[c], tv});
      worst[c] = std::max(worst[c], tv);
    }
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    report.worst.push_back({"worst", checkpoints[c], worst[c]});
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const bool below = worst[c] < options.epsilon;
    const bool stays = c + 1 == checkpoints.size() || worst[c + 1] < options.epsilon;
    if (below && stays) {
      report.tau_m = checkpoints[c];
      break;
    }
  }
  return report;
}

void write_mixing_csv(const MixingReport& report, std::ostream& out) {
  out << "start_label,step,tv_estimate\n";
  auto row = [&](const TvSample& s) { out << s.start_label << ',' << s.step << ',' << s.tv << '\n'; };
  for (const auto& s : report.per_step_tv) row(s);
  for (const auto& s : report.worst) row(s);
  out << "summary,";
  if (report.tau_m) {
    out << *report.tau_m;
  } else {
    out << "not_mixed";
  }
  out << ',' << report.epsilon << '\n';
}

}  // namespace decfilt
