#include "decfilt/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace decfilt {

Belief normalized(std::vector<double> weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::domain_error("cannot normalize: total mass is not positive");
  }
  for (double& w : weights) w /= total;
  return Belief{std::move(weights)};
}

DiscreteHMM::DiscreteHMM(int n_states, int n_obs, std::vector<double> prior,
                         std::vector<double> transition, std::vector<double> observation)
    : n_states_(n_states),
      n_obs_(n_obs),
      prior_(std::move(prior)),
      transition_(std::move(transition)),
      observation_(std::move(observation)) {
  if (n_states_ < 1 || n_obs_ < 1) throw ModelError("n_states and n_obs must be positive");
  const auto k = static_cast<std::size_t>(n_states_);
  const auto m = static_cast<std::size_t>(n_obs_);
  if (prior_.size() != k) throw ModelError("prior must have n_states entries");
  if (transition_.size() != k * k) throw ModelError("transition must be n_states x n_states");
  if (observation_.size() != k * m) throw ModelError("observation must be n_states x n_obs");
}

namespace {

void check_distribution(const std::string& table, int row, const double* p, int n,
                        std::vector<Violation>& out) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) {
      out.push_back({table, row, p[i], table + " row " + std::to_string(row) + " has non-finite entry"});
      return;
    }
    if (p[i] < 0.0) {
      std::ostringstream msg;
      msg << table << (row >= 0 ? " row " + std::to_string(row) : std::string()) << " entry " << i
          << " is negative (" << p[i] << ")";
      out.push_back({table, row, p[i], msg.str()});
    } else if (p[i] > 1.0 + kProbTolerance) {
      std::ostringstream msg;
      msg << table << (row >= 0 ? " row " + std::to_string(row) : std::string()) << " entry " << i
          << " exceeds 1 (" << p[i] << ")";
      out.push_back({table, row, p[i] - 1.0, msg.str()});
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kProbTolerance) {
    std::ostringstream msg;
    msg << table << (row >= 0 ? " row " + std::to_string(row) : std::string()) << " sums to " << sum;
    out.push_back({table, row, sum - 1.0, msg.str()});
  }
}

}  // namespace

std::vector<Violation> validate(const DiscreteHMM& model) {
  std::vector<Violation> out;
  const int k = model.n_states();
  const int m = model.n_obs();
  check_distribution("prior", -1, model.prior_table().data(), k, out);
  for (int i = 0; i < k; ++i) {
    check_distribution("transition", i, model.transition_table().data() + i * k, k, out);
  }
  for (int i = 0; i < k; ++i) {
    check_distribution("observation", i, model.observation_table().data() + i * m, m, out);
  }
  return out;
}

void require_valid(const DiscreteHMM& model) {
  auto violations = validate(model);
  if (violations.empty()) return;
  std::string msg = "invalid model:";
  for (const auto& v : violations) msg += " " + v.message + ";";
  throw ModelError(msg);
}

DiscreteHMM canonical_c1() {
  return DiscreteHMM(2, 2, {0.5, 0.5}, {0.7, 0.3, 0.3, 0.7}, {0.8, 0.2, 0.2, 0.8});
}

namespace {

std::vector<double> sharpened_rows(int rows, int cols, double sharpness, Rng& rng) {
  // Each row picks its one-hot column from a shuffled cycle of the columns so
  // that, when rows == cols, the deterministic part is a permutation.
  std::vector<int> targets(static_cast<std::size_t>(std::max(rows, cols)));
  std::iota(targets.begin(), targets.end(), 0);
  std::shuffle(targets.begin(), targets.end(), rng);
  std::vector<double> table(static_cast<std::size_t>(rows) * cols, (1.0 - sharpness) / cols);
  int next = 0;
  for (int r = 0; r < rows; ++r) {
    while (targets[next % targets.size()] >= cols) ++next;
    table[r * cols + targets[next % targets.size()]] += sharpness;
    ++next;
  }
  return table;
}

}  // namespace

DiscreteHMM make_random_hmm(int n_states, int n_obs, double transition_sharpness,
                            double observation_sharpness, std::uint64_t seed) {
  if (n_states < 2 || n_obs < 2) throw ModelError("make_random_hmm: sizes must be >= 2");
  auto in_unit = [](double s) { return s >= 0.0 && s <= 1.0; };
  if (!in_unit(transition_sharpness) || !in_unit(observation_sharpness)) {
    throw ModelError("make_random_hmm: sharpness must lie in [0, 1]");
  }
  Rng rng = make_stream(seed);
  auto transition = sharpened_rows(n_states, n_states, transition_sharpness, rng);
  auto observation = sharpened_rows(n_states, n_obs, observation_sharpness, rng);
  std::vector<double> prior(static_cast<std::size_t>(n_states), 1.0 / n_states);
  return DiscreteHMM(n_states, n_obs, std::move(prior), std::move(transition),
                     std::move(observation));
}

std::pair<Trajectory, EvidenceSequence> simulate(const DiscreteHMM& model, std::size_t T,
                                                 std::uint64_t seed) {
  Rng rng = make_stream(seed);
  const auto k = static_cast<std::size_t>(model.n_states());
  const auto m = static_cast<std::size_t>(model.n_obs());
  Trajectory xs(T);
  EvidenceSequence ys(T);
  const double* trans = model.transition_table().data();
  const double* obs = model.observation_table().data();
  for (std::size_t t = 0; t < T; ++t) {
    xs[t] = t == 0 ? sample_categorical(model.prior_table(), rng)
                   : sample_categorical({trans + xs[t - 1] * k, k}, rng);
    ys[t] = sample_categorical({obs + xs[t] * m, m}, rng);
  }
  return {std::move(xs), std::move(ys)};
}

DiscreteHMM permute_states(const DiscreteHMM& model, const std::vector<int>& perm) {
  const int k = model.n_states();
  const int m = model.n_obs();
  if (static_cast<int>(perm.size()) != k) throw ModelError("permutation size mismatch");
  std::vector<double> prior(k), trans(k * k), obs(k * m);
  for (int i = 0; i < k; ++i) {
    prior[perm[i]] = model.prior(i);
    for (int j = 0; j < k; ++j) trans[perm[i] * k + perm[j]] = model.transition(i, j);
    for (int y = 0; y < m; ++y) obs[perm[i] * m + y] = model.observation(i, y);
  }
  return DiscreteHMM(k, m, std::move(prior), std::move(trans), std::move(obs));
}

namespace {

nlohmann::json rows_json(const std::vector<double>& flat, int rows, int cols) {
  auto out = nlohmann::json::array();
  for (int r = 0; r < rows; ++r) {
    out.push_back(std::vector<double>(flat.begin() + r * cols, flat.begin() + (r + 1) * cols));
  }
  return out;
}

std::vector<double> flatten_rows(const nlohmann::json& j, int rows, int cols, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ModelError(std::string("model file: '") + name + "' must have " + std::to_string(rows) +
                     " rows");
  }
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : j) {
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ModelError(std::string("model file: '") + name + "' rows must have " +
                       std::to_string(cols) + " entries");
    }
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

}  // namespace

std::string to_json(const DiscreteHMM& model) {
  nlohmann::ordered_json j;
  j["n_states"] = model.n_states();
  j["n_obs"] = model.n_obs();
  j["prior"] = model.prior_table();
  j["transition"] = rows_json(model.transition_table(), model.n_states(), model.n_states());
  j["observation"] = rows_json(model.observation_table(), model.n_states(), model.n_obs());
  return j.dump(2) + "\n";
}

DiscreteHMM hmm_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    const int k = j.at("n_states").get<int>();
    const int m = j.at("n_obs").get<int>();
    return DiscreteHMM(k, m, j.at("prior").get<std::vector<double>>(),
                       flatten_rows(j.at("transition"), k, k, "transition"),
                       flatten_rows(j.at("observation"), k, m, "observation"));
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model file: ") + e.what());
  }
}

void write_model_file(const DiscreteHMM& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json(model);
}

DiscreteHMM read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return hmm_from_json(buffer.str());
}

std::string model_hash(const DiscreteHMM& model) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : to_json(model)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace decfilt
