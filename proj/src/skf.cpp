#include "decfilt/skf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace decfilt {

double SwitchingKF::switch_weight(std::optional<int> from, int to) const {
  if (switch_markov && from) return (*switch_markov)[*from * n_switch() + to];
  return switch_prior[to];
}

namespace {

void check_categorical(const double* p, int n, const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(p[i] >= 0.0)) throw std::invalid_argument(what + " has a negative entry");
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument(what + " does not sum to 1");
}

}  // namespace

void validate(const SwitchingKF& model, bool allow_degenerate) {
  const int n = model.n_switch();
  if (n < 1) throw std::invalid_argument("skf: need at least one switch value");
  if (static_cast<int>(model.switch_prior.size()) != n) {
    throw std::invalid_argument("skf: switch_prior size must match switch_values");
  }
  check_categorical(model.switch_prior.data(), n, "skf: switch_prior");
  if (model.switch_markov) {
    if (static_cast<int>(model.switch_markov->size()) != n * n) {
      throw std::invalid_argument("skf: switch_markov must be n x n");
    }
    for (int r = 0; r < n; ++r) {
      check_categorical(model.switch_markov->data() + r * n, n,
                        "skf: switch_markov row " + std::to_string(r));
    }
  }
  auto ok = [&](double s) { return allow_degenerate ? s >= 0.0 : s > 0.0; };
  if (!ok(model.sigma_v) || !ok(model.sigma_w) || !ok(model.start_std)) {
    throw std::invalid_argument("skf: sigma_v, sigma_w and start_std must be positive");
  }
}

std::string to_json(const SwitchingKF& model) {
  nlohmann::ordered_json j;
  j["switch_values"] = model.switch_values;
  j["switch_prior"] = model.switch_prior;
  if (model.switch_markov) {
    auto rows = nlohmann::json::array();
    const int n = model.n_switch();
    for (int r = 0; r < n; ++r) {
      rows.push_back(std::vector<double>(model.switch_markov->begin() + r * n,
                                         model.switch_markov->begin() + (r + 1) * n));
    }
    j["switch_markov"] = rows;
  }
  j["sigma_v"] = model.sigma_v;
  j["sigma_w"] = model.sigma_w;
  j["start_mean"] = model.start_mean;
  j["start_std"] = model.start_std;
  return j.dump(2) + "\n";
}

SwitchingKF skf_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SwitchingKF m;
    m.switch_values = j.at("switch_values").get<std::vector<double>>();
    m.switch_prior = j.at("switch_prior").get<std::vector<double>>();
    if (j.contains("switch_markov")) {
      std::vector<double> flat;
      for (const auto& row : j.at("switch_markov")) {
        for (const auto& v : row) flat.push_back(v.get<double>());
      }
      m.switch_markov = std::move(flat);
    }
    m.sigma_v = j.at("sigma_v").get<double>();
    m.sigma_w = j.at("sigma_w").get<double>();
    m.start_mean = j.value("start_mean", 0.0);
    m.start_std = j.value("start_std", 1.0);
    validate(m, true);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("skf model: ") + e.what());
  }
}

SwitchingKF read_skf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return skf_from_json(buffer.str());
}

std::pair<HybridTrajectory, std::vector<double>> skf_simulate(const SwitchingKF& model,
                                                              std::size_t T, std::uint64_t seed) {
  validate(model, true);
  Rng rng = make_stream(seed);
  HybridTrajectory traj;
  std::vector<double> ys;
  traj.xs.reserve(T);
  traj.ss.reserve(T);
  ys.reserve(T);
  std::vector<double> row(model.n_switch());
  for (std::size_t t = 0; t < T; ++t) {
    std::optional<int> prev;
    if (t > 0) prev = traj.ss.back();
    for (int s = 0; s < model.n_switch(); ++s) row[s] = model.switch_weight(prev, s);
    const int s = sample_categorical(row, rng);
    const double base = t == 0 ? model.start_mean + model.start_std * standard_normal(rng)
                               : traj.xs.back();
    const double x = base + model.switch_values[s] + model.sigma_v * standard_normal(rng);
    traj.ss.push_back(s);
    traj.xs.push_back(x);
    ys.push_back(x + model.sigma_w * standard_normal(rng));
  }
  return {std::move(traj), std::move(ys)};
}

Gaussian skf_cond_x(const SwitchingKF& model, std::optional<double> x_prev,
                    std::optional<double> x_next, int s_t, std::optional<int> s_next, double y) {
  if (x_next && !s_next) throw std::invalid_argument("skf_cond_x: x_next needs s_next");
  const double var_v = model.sigma_v * model.sigma_v;
  const double var_w = model.sigma_w * model.sigma_w;
  // Precision-weighted sum of the Gaussian factors in x.
  double precision = 1.0 / var_w;
  double weighted = y / var_w;
  if (x_prev) {
    precision += 1.0 / var_v;
    weighted += (*x_prev + model.switch_values[s_t]) / var_v;
  } else {
    const double var0 = model.start_variance();
    precision += 1.0 / var0;
    weighted += (model.start_mean + model.switch_values[s_t]) / var0;
  }
  if (x_next) {
    precision += 1.0 / var_v;
    weighted += (*x_next - model.switch_values[*s_next]) / var_v;
  }
  return {weighted / precision, std::sqrt(1.0 / precision)};
}

std::vector<double> skf_cond_s(const SwitchingKF& model, std::optional<int> s_prev,
                               std::optional<int> s_next, double x_t,
                               std::optional<double> x_prev) {
  const int n = model.n_switch();
  std::vector<double> logw(n);
  const double var = x_prev ? model.sigma_v * model.sigma_v : model.start_variance();
  const double base = x_prev ? *x_prev : model.start_mean;
  double best = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s) {
    double w = model.switch_weight(s_prev, s);
    if (model.switch_markov && s_next) w *= (*model.switch_markov)[s * n + *s_next];
    const double r = x_t - base - model.switch_values[s];
    logw[s] = w > 0.0 ? std::log(w) - 0.5 * r * r / var : -std::numeric_limits<double>::infinity();
    best = std::max(best, logw[s]);
  }
  if (!std::isfinite(best)) throw std::domain_error("skf_cond_s: all switch weights are zero");
  double total = 0.0;
  for (double& v : logw) {
    v = std::exp(v - best);
    total += v;
  }
  for (double& v : logw) v /= total;
  return logw;
}

SkfMcmcFilter::SkfMcmcFilter(const SwitchingKF& model, SkfChainConfig config)
    : model_(&model), config_(std::move(config)), rng_(make_stream(config_.seed)) {
  validate(model);
  if (config_.steps_per_update < 1) throw std::invalid_argument("skf chain: S must be >= 1");
  if (config_.burn_in >= config_.steps_per_update) {
    throw std::invalid_argument("skf chain: burn-in must be smaller than S");
  }
  if (config_.gap < 1) throw std::invalid_argument("skf chain: gap must be >= 1");
}

void SkfMcmcFilter::clear_tallies() {
  steps_since_update_ = 0;
  tally_count_ = 0;
  tally_sum_ = 0.0;
  tally_sumsq_ = 0.0;
}

void SkfMcmcFilter::set_state(HybridTrajectory state, std::vector<double> evidence) {
  if (state.xs.size() != evidence.size() || state.ss.size() != evidence.size()) {
    throw std::invalid_argument("skf chain: state and evidence lengths differ");
  }
  state_ = std::move(state);
  evidence_ = std::move(evidence);
  clear_tallies();
}

void SkfMcmcFilter::extend(double y) {
  const int n = model_->n_switch();
  std::optional<int> s_prev;
  std::optional<double> x_prev;
  if (!state_.xs.empty()) {
    s_prev = state_.ss.back();
    x_prev = state_.xs.back();
  }
  std::vector<double> w(n);
  for (int s = 0; s < n; ++s) w[s] = model_->switch_weight(s_prev, s);
  const int s = sample_categorical(w, rng_);
  const Gaussian g = skf_cond_x(*model_, x_prev, std::nullopt, s, std::nullopt, y);
  state_.ss.push_back(s);
  state_.xs.push_back(g.mean + g.std * standard_normal(rng_));
  evidence_.push_back(y);
  clear_tallies();
}

void SkfMcmcFilter::observe(double y) {
  extend(y);
  run(config_.steps_per_update);
}

void SkfMcmcFilter::step() {
  const std::size_t T = state_.size();
  if (T == 0) throw std::logic_error("skf chain: cannot step an empty history");
  last_site_ = config_.schedule.sample(T, rng_);
  const std::size_t i = last_site_ - 1;
  std::optional<int> s_prev, s_next;
  std::optional<double> x_prev, x_next;
  if (i > 0) {
    s_prev = state_.ss[i - 1];
    x_prev = state_.xs[i - 1];
  }
  if (i + 1 < T) {
    s_next = state_.ss[i + 1];
    x_next = state_.xs[i + 1];
  }
  const auto ps = skf_cond_s(*model_, s_prev, s_next, state_.xs[i], x_prev);
  state_.ss[i] = sample_categorical(ps, 1.0, rng_);
  const Gaussian g = skf_cond_x(*model_, x_prev, x_next, state_.ss[i], s_next, evidence_[i]);
  state_.xs[i] = g.mean + g.std * standard_normal(rng_);

  ++steps_since_update_;
  if (steps_since_update_ > config_.burn_in &&
      (steps_since_update_ - config_.burn_in) % config_.gap == 0) {
    const double x = state_.xs.back();
    ++tally_count_;
    tally_sum_ += x;
    tally_sumsq_ += x * x;
  }
}

void SkfMcmcFilter::run(std::size_t steps) {
  for (std::size_t s = 0; s < steps; ++s) step();
}

Moments SkfMcmcFilter::estimate() const {
  if (tally_count_ == 0) throw std::logic_error("skf chain: no tallied steps since the last update");
  const double n = static_cast<double>(tally_count_);
  const double mean = tally_sum_ / n;
  return {mean, std::max(0.0, tally_sumsq_ / n - mean * mean)};
}

SkfSimulator::State SkfSimulator::sample_initial(Rng& rng) const {
  const int s = sample_categorical(model_->switch_prior, rng);
  const double x = model_->start_mean + model_->switch_values[s] +
                   std::sqrt(model_->start_variance()) * standard_normal(rng);
  return {x, s};
}

SkfSimulator::State SkfSimulator::sample_transition(const State& p, Rng& rng) const {
  const int n = model_->n_switch();
  int s;
  if (model_->switch_markov) {
    s = sample_categorical({model_->switch_markov->data() + p.s * n, static_cast<std::size_t>(n)},
                           rng);
  } else {
    s = sample_categorical(model_->switch_prior, rng);
  }
  return {p.x + model_->switch_values[s] + model_->sigma_v * standard_normal(rng), s};
}

double SkfSimulator::observation_likelihood(const State& p, double y) const {
  const double r = (y - p.x) / model_->sigma_w;
  return std::exp(-0.5 * r * r) / (model_->sigma_w * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace decfilt
