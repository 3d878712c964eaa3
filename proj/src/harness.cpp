#include "decfilt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "decfilt/diagnostics.hpp"
#include "decfilt/dmcmc.hpp"
#include "decfilt/exact.hpp"
#include "decfilt/pfilter.hpp"

namespace decfilt {

namespace {

constexpr std::pair<Scenario, const char*> kScenarioNames[] = {
    {Scenario::stationarity, "stationarity"},
    {Scenario::error_vs_samples, "error_vs_samples"},
    {Scenario::error_vs_history, "error_vs_history"},
    {Scenario::mixing_vs_history, "mixing_vs_history"},
    {Scenario::pf_compare, "pf_compare"},
    {Scenario::skf_track, "skf_track"},
};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [value, name] : kScenarioNames) {
    if (value == s) return name;
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  for (const auto& [value, name] : kScenarioNames) {
    if (s == name) return value;
  }
  throw ConfigError("scenario: unknown scenario '" + s + "'");
}

std::uint64_t cell_seed(std::uint64_t root, std::size_t replication) {
  return splitmix(splitmix(root) ^ (replication + 1));
}

std::uint64_t estimator_seed(std::uint64_t cell, const std::string& label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix(cell ^ h);
}

DiscreteHMM preset_model(const std::string& name) {
  if (name == "c1") return canonical_c1();
  if (name == "slow") return make_random_hmm(3, 3, 0.9, 0.15, 11);
  if (name == "fast") return make_random_hmm(3, 3, 0.2, 0.15, 12);
  if (name == "large8") return make_random_hmm(8, 8, 0.5, 0.6, 8);
  throw ConfigError("model.preset: unknown preset '" + name + "'");
}

SwitchingKF preset_skf() {
  SwitchingKF m;
  m.switch_values = {-1.0, 1.0};
  m.switch_prior = {0.5, 0.5};
  m.sigma_v = 0.5;
  m.sigma_w = 1.0;
  m.start_mean = 0.0;
  m.start_std = 1.0;
  return m;
}

// ---------------------------------------------------------------- config

namespace {

using nlohmann::json;

template <class T>
T field(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key + ": wrong type");
  }
}

std::vector<std::size_t> size_list(const json& j, const std::string& key) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) throw ConfigError("config." + key + ": expected a list");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_unsigned()) {
      throw ConfigError("config." + key + "[" + std::to_string(i) + "]: expected a nonnegative integer");
    }
    out.push_back(v[i].get<std::size_t>());
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: expected an object");
  ExperimentConfig c;
  if (!j.contains("scenario")) throw ConfigError("config.scenario: required");
  try {
    c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  } catch (const json::exception&) {
    throw ConfigError("config.scenario: expected a string");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.contains("preset")) c.model.preset = field<std::string>(m, "preset", "config.model.", "");
    if (m.contains("file")) {
      std::filesystem::path p = field<std::string>(m, "file", "config.model.", "");
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      c.model.path = p.string();
    }
    if (m.contains("generate")) {
      const auto& g = m.at("generate");
      ModelSource::Generator gen;
      gen.states = field<int>(g, "states", "config.model.generate.", 2);
      gen.obs = field<int>(g, "obs", "config.model.generate.", 2);
      gen.transition_sharpness = field<double>(g, "tsharp", "config.model.generate.", 0.5);
      gen.observation_sharpness = field<double>(g, "osharp", "config.model.generate.", 0.5);
      gen.seed = field<std::uint64_t>(g, "seed", "config.model.generate.", 0);
      c.model.generator = gen;
    }
  }
  if (j.contains("skf")) {
    const auto& s = j.at("skf");
    if (s.is_string() && s.get<std::string>() == "preset") {
      c.skf = preset_skf();
    } else if (s.is_object() && s.contains("file")) {
      std::filesystem::path p = s.at("file").get<std::string>();
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      c.skf = read_skf_file(p.string());
    } else {
      try {
        c.skf = skf_from_json(s.dump());
      } catch (const std::exception& e) {
        throw ConfigError(std::string("config.skf: ") + e.what());
      }
    }
  }
  c.history_lengths = size_list(j, "T");
  c.budgets = size_list(j, "budgets");
  c.particles = size_list(j, "particles");
  if (j.contains("decays")) {
    if (!j.at("decays").is_array()) throw ConfigError("config.decays: expected a list");
    for (std::size_t i = 0; i < j.at("decays").size(); ++i) {
      if (!j.at("decays")[i].is_string()) {
        throw ConfigError("config.decays[" + std::to_string(i) + "]: expected a string");
      }
      c.decays.push_back(j.at("decays")[i].get<std::string>());
    }
  }
  c.replications = field<std::size_t>(j, "replications", "config.", 1);
  c.seed = field<std::uint64_t>(j, "seed", "config.", 0);
  c.output = field<std::string>(j, "output", "config.", "");
  if (j.contains("limit") && !j.at("limit").is_null()) {
    c.limit = field<std::size_t>(j, "limit", "config.", DecaySchedule::kUnbounded);
  }
  c.burn_in = field<std::size_t>(j, "burn_in", "config.", 0);
  c.gap = field<std::size_t>(j, "gap", "config.", 1);
  c.warmup_steps = field<std::size_t>(j, "warmup_steps", "config.", 0);
  c.epsilon = field<double>(j, "epsilon", "config.", 0.05);
  c.chains = field<std::size_t>(j, "chains", "config.", 1000);
  c.max_steps = field<std::size_t>(j, "max_steps", "config.", std::size_t{1} << 16);
  validate(c);
  return c;
}

ExperimentConfig read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::filesystem::path(path).parent_path().string());
}

void validate(const ExperimentConfig& c) {
  const bool discrete = c.scenario != Scenario::skf_track;
  if (c.history_lengths.empty()) throw ConfigError("config.T: sweep list must be nonempty");
  for (std::size_t i = 0; i < c.history_lengths.size(); ++i) {
    if (c.history_lengths[i] < 1) {
      throw ConfigError("config.T[" + std::to_string(i) + "]: must be >= 1");
    }
  }
  if (c.scenario != Scenario::mixing_vs_history && c.budgets.empty()) {
    throw ConfigError("config.budgets: sweep list must be nonempty");
  }
  for (std::size_t i = 0; i < c.budgets.size(); ++i) {
    if (c.budgets[i] < 1) throw ConfigError("config.budgets[" + std::to_string(i) + "]: must be >= 1");
    if (c.scenario != Scenario::skf_track && c.budgets[i] <= c.burn_in) {
      throw ConfigError("config.budgets[" + std::to_string(i) + "]: must exceed burn_in");
    }
  }
  if (c.decays.empty()) throw ConfigError("config.decays: sweep list must be nonempty");
  for (std::size_t i = 0; i < c.decays.size(); ++i) {
    try {
      DecaySchedule::parse(c.decays[i], c.limit);
    } catch (const std::exception& e) {
      throw ConfigError("config.decays[" + std::to_string(i) + "]: " + e.what());
    }
  }
  for (std::size_t i = 0; i < c.particles.size(); ++i) {
    if (c.particles[i] < 1) throw ConfigError("config.particles[" + std::to_string(i) + "]: must be >= 1");
  }
  if (c.replications < 1) throw ConfigError("config.replications: must be >= 1");
  if (c.gap < 1) throw ConfigError("config.gap: must be >= 1");
  if (c.scenario == Scenario::mixing_vs_history) {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("config.epsilon: must lie in (0, 1)");
    if (c.chains < 1) throw ConfigError("config.chains: must be >= 1");
  }
  if (discrete) {
    const int sources = !c.model.preset.empty() + !c.model.path.empty() + c.model.generator.has_value();
    if (sources != 1) {
      throw ConfigError("config.model: exactly one of preset, file, generate is required");
    }
  } else if (!c.skf) {
    throw ConfigError("config.skf: required for skf_track");
  }
}

// ---------------------------------------------------------------- scenarios

namespace {

DiscreteHMM load_model(const ModelSource& src) {
  DiscreteHMM model;
  if (!src.preset.empty()) {
    model = preset_model(src.preset);
  } else if (!src.path.empty()) {
    model = read_model_file(src.path);
  } else {
    const auto& g = *src.generator;
    model = make_random_hmm(g.states, g.obs, g.transition_sharpness, g.observation_sharpness, g.seed);
  }
  require_valid(model);
  return model;
}

std::string model_name(const ModelSource& src) {
  if (!src.preset.empty()) return src.preset;
  if (!src.path.empty()) return std::filesystem::path(src.path).stem().string();
  return "generated";
}

struct Context {
  const ExperimentConfig& config;
  std::string scenario;
  std::string model_id;
  std::vector<ResultRow>& rows;

  void add(std::size_t T, const std::string& decay, std::size_t budget, std::size_t rep,
           std::uint64_t seed, std::optional<double> value, std::string status = "ok") const {
    rows.push_back({scenario, model_id, T, decay, budget, rep, seed, value, std::move(status)});
  }
};

std::size_t max_of(const std::vector<std::size_t>& v) { return *std::max_element(v.begin(), v.end()); }

void run_stationarity(const Context& ctx, const DiscreteHMM& model) {
  const auto& c = ctx.config;
  for (std::size_t T : c.history_lengths) {
    for (const auto& spec : c.decays) {
      for (std::size_t budget : c.budgets) {
        for (std::size_t rep = 0; rep < c.replications; ++rep) {
          const auto seed = cell_seed(c.seed, rep);
          const auto evidence = simulate(model, T, seed).second;
          const auto target = smooth(model, evidence);
          ChainConfig cc;
          cc.steps_per_update = budget;
          cc.burn_in = c.burn_in;
          cc.schedule = DecaySchedule::parse(spec, c.limit);
          cc.seed = estimator_seed(seed, cc.schedule.label());
          Rng init = make_stream(cc.seed, 1);
          DecayedMcmcFilter chain(model, cc, evidence,
                                  greedy_forward_trajectory(model, evidence, init));
          std::vector<std::vector<double>> hist(T, std::vector<double>(model.n_states(), 0.0));
          for (std::size_t s = 0; s < budget; ++s) {
            chain.step();
            if (s < c.burn_in) continue;
            for (std::size_t t = 0; t < T; ++t) hist[t][chain.trajectory()[t]] += 1.0;
          }
          double worst = 0.0;
          const double n = static_cast<double>(budget - c.burn_in);
          for (std::size_t t = 0; t < T; ++t) {
            for (double& v : hist[t]) v /= n;
            worst = std::max(worst, tv_distance(hist[t], target.per_t[t].probs));
          }
          ctx.add(T, cc.schedule.label(), budget, rep, seed, worst);
        }
      }
    }
  }
}

void run_error_vs_samples(const Context& ctx, const DiscreteHMM& model) {
  const auto& c = ctx.config;
  std::vector<std::size_t> order(c.budgets);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  for (std::size_t T : c.history_lengths) {
    for (const auto& spec : c.decays) {
      for (std::size_t rep = 0; rep < c.replications; ++rep) {
        const auto seed = cell_seed(c.seed, rep);
        const auto evidence = simulate(model, T, seed).second;
        const auto exact = forward_filter(model, evidence).beliefs.back();
        ChainConfig cc;
        cc.steps_per_update = std::max(c.warmup_steps, c.burn_in + 1);
        cc.burn_in = c.burn_in;
        cc.schedule = DecaySchedule::parse(spec, c.limit);
        cc.seed = estimator_seed(seed, cc.schedule.label());
        DecayedMcmcFilter chain(model, cc);
        for (std::size_t t = 0; t + 1 < T; ++t) {
          if (c.warmup_steps > 0) {
            chain.observe(evidence[t]);
          } else {
            chain.extend(evidence[t]);
          }
        }
        chain.extend(evidence.back());
        std::map<std::size_t, double> error;
        std::size_t done = 0;
        for (std::size_t b : order) {
          chain.run(b - done);
          done = b;
          error[b] = tv_distance(chain.estimate(), exact);
        }
        for (std::size_t b : c.budgets) ctx.add(T, cc.schedule.label(), b, rep, seed, error[b]);
      }
    }
  }
}

// Online filtering over the longest history; errors recorded at each T in
// the sweep. Particle filters use N = budget when `equal_budget`, otherwise
// each N from the particles list.
void run_online(const Context& ctx, const DiscreteHMM& model, bool equal_budget) {
  const auto& c = ctx.config;
  const std::size_t max_t = max_of(c.history_lengths);
  std::vector<std::size_t> marks(c.history_lengths);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  for (std::size_t rep = 0; rep < c.replications; ++rep) {
    const auto seed = cell_seed(c.seed, rep);
    const auto evidence = simulate(model, max_t, seed).second;
    const auto exact = forward_filter(model, evidence).beliefs;
    for (std::size_t budget : c.budgets) {
      for (const auto& spec : c.decays) {
        ChainConfig cc;
        cc.steps_per_update = budget;
        cc.burn_in = c.burn_in;
        cc.schedule = DecaySchedule::parse(spec, c.limit);
        cc.seed = estimator_seed(seed, cc.schedule.label() + "/" + std::to_string(budget));
        DecayedMcmcFilter chain(model, cc);
        std::size_t next = 0;
        for (std::size_t t = 1; t <= max_t && next < marks.size(); ++t) {
          chain.observe(evidence[t - 1]);
          if (t == marks[next]) {
            ctx.add(t, cc.schedule.label(), budget, rep, seed,
                    tv_distance(chain.estimate(), exact[t - 1]));
            ++next;
          }
        }
      }
    }
    std::vector<std::size_t> ns = equal_budget ? c.budgets : c.particles;
    for (std::size_t n : ns) {
      Rng rng = make_stream(estimator_seed(seed, "pf/" + std::to_string(n)));
      HmmSimulator sim(model);
      auto ps = pf_init(sim, n, rng);
      std::size_t next = 0;
      std::string failure;
      for (std::size_t t = 1; t <= max_t && next < marks.size(); ++t) {
        if (failure.empty()) {
          try {
            pf_step(ps, sim, evidence[t - 1], rng);
          } catch (const ParticleCollapse& e) {
            failure = "particle_collapse@t=" + std::to_string(e.t());
          }
        }
        if (t == marks[next]) {
          if (failure.empty()) {
            ctx.add(t, "pf", n, rep, seed, tv_distance(pf_belief(ps, model.n_states()), exact[t - 1]));
          } else {
            ctx.add(t, "pf", n, rep, seed, std::nullopt, failure);
          }
          ++next;
        }
      }
    }
  }
}

void run_mixing(const Context& ctx, const DiscreteHMM& model) {
  const auto& c = ctx.config;
  for (std::size_t T : c.history_lengths) {
    for (const auto& spec : c.decays) {
      for (std::size_t rep = 0; rep < c.replications; ++rep) {
        const auto seed = cell_seed(c.seed, rep);
        const auto evidence = simulate(model, T, seed).second;
        const auto schedule = DecaySchedule::parse(spec, c.limit);
        MixingOptions opt;
        opt.epsilon = c.epsilon;
        opt.chains = c.chains;
        opt.max_steps = c.max_steps;
        opt.seed = estimator_seed(seed, schedule.label());
        const auto report =
            estimate_mixing_time(model, evidence, schedule, opt, adversarial_starts(model, T, seed));
        if (report.tau_m) {
          ctx.add(T, schedule.label(), c.max_steps, rep, seed, static_cast<double>(*report.tau_m));
        } else {
          ctx.add(T, schedule.label(), c.max_steps, rep, seed, std::nullopt, "not_mixed");
        }
      }
    }
  }
}

void run_skf(const Context& ctx, const SwitchingKF& model) {
  const auto& c = ctx.config;
  const std::size_t max_t = max_of(c.history_lengths);
  std::vector<std::size_t> marks(c.history_lengths);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
  for (std::size_t rep = 0; rep < c.replications; ++rep) {
    const auto seed = cell_seed(c.seed, rep);
    const auto [truth, ys] = skf_simulate(model, max_t, seed);
    for (std::size_t budget : c.budgets) {
      for (const auto& spec : c.decays) {
        SkfChainConfig cc;
        cc.gap = c.gap;
        cc.burn_in = c.burn_in;
        cc.steps_per_update = budget * c.gap + c.burn_in;
        cc.schedule = DecaySchedule::parse(spec, c.limit);
        cc.seed = estimator_seed(seed, cc.schedule.label() + "/" + std::to_string(budget));
        SkfMcmcFilter chain(model, cc);
        std::size_t next = 0;
        for (std::size_t t = 1; t <= max_t && next < marks.size(); ++t) {
          chain.observe(ys[t - 1]);
          if (t == marks[next]) {
            ctx.add(t, cc.schedule.label(), budget, rep, seed,
                    std::abs(chain.estimate().mean - truth.xs[t - 1]));
            ++next;
          }
        }
      }
    }
    for (std::size_t n : c.particles) {
      Rng rng = make_stream(estimator_seed(seed, "pf/" + std::to_string(n)));
      SkfSimulator sim(model);
      auto ps = pf_init(sim, n, rng);
      std::size_t next = 0;
      std::string failure;
      for (std::size_t t = 1; t <= max_t && next < marks.size(); ++t) {
        if (failure.empty()) {
          try {
            pf_step(ps, sim, ys[t - 1], rng);
          } catch (const ParticleCollapse& e) {
            failure = "particle_collapse@t=" + std::to_string(e.t());
          }
        }
        if (t == marks[next]) {
          if (failure.empty()) {
            const double mean = pf_moments(ps, [](const SkfSimulator::State& p) { return p.x; }).mean;
            ctx.add(t, "pf", n, rep, seed, std::abs(mean - truth.xs[t - 1]));
          } else {
            ctx.add(t, "pf", n, rep, seed, std::nullopt, failure);
          }
          ++next;
        }
      }
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult result;
  result.value_column = config.scenario == Scenario::mixing_vs_history ? "tau_m" : "error";
  if (config.scenario == Scenario::skf_track) {
    validate(*config.skf);
    result.model_id = "skf-" + [&] {
      std::uint64_t v = 0xcbf29ce484222325ull;
      for (unsigned char ch : to_json(*config.skf)) {
        v ^= ch;
        v *= 0x100000001b3ull;
      }
      std::ostringstream out;
      out << std::hex << std::setw(8) << std::setfill('0') << (v & 0xffffffffull);
      return out.str();
    }();
    Context ctx{config, to_string(config.scenario), result.model_id, result.rows};
    run_skf(ctx, *config.skf);
    return result;
  }
  const DiscreteHMM model = load_model(config.model);
  result.model_id = model_name(config.model) + "-" + model_hash(model).substr(0, 8);
  result.eta = mixing_parameter(model);
  Context ctx{config, to_string(config.scenario), result.model_id, result.rows};
  switch (config.scenario) {
    case Scenario::stationarity: run_stationarity(ctx, model); break;
    case Scenario::error_vs_samples: run_error_vs_samples(ctx, model); break;
    case Scenario::error_vs_history: run_online(ctx, model, false); break;
    case Scenario::pf_compare: run_online(ctx, model, true); break;
    case Scenario::mixing_vs_history: run_mixing(ctx, model); break;
    case Scenario::skf_track: break;
  }
  return result;
}

// ---------------------------------------------------------------- CSV

namespace {

std::string format_value(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_results_csv(const ExperimentResult& result, std::ostream& out) {
  out << "scenario,model_id,T,decay,budget,replication,seed," << result.value_column << ",status\n";
  for (const auto& r : result.rows) {
    out << r.scenario << ',' << r.model_id << ',' << r.T << ',' << r.decay << ',' << r.budget << ','
        << r.replication << ',' << r.seed << ',' << (r.value ? format_value(*r.value) : "") << ','
        << r.status << '\n';
  }
}

std::vector<ResultRow> read_results_csv(const std::vector<std::string>& paths) {
  std::vector<ResultRow> rows;
  std::string header;
  for (const auto& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    if (split_csv_line(line).size() != 9 || line.rfind("scenario,model_id,T,decay,budget,", 0) != 0) {
      throw std::runtime_error(path + ": not a result CSV");
    }
    if (header.empty()) {
      header = line;
    } else if (line != header) {
      throw std::runtime_error(path + ": schema mismatch ('" + line + "' vs '" + header + "')");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (cells.size() != 9) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 9 columns");
      }
      ResultRow r;
      try {
        r.scenario = cells[0];
        r.model_id = cells[1];
        r.T = std::stoull(cells[2]);
        r.decay = cells[3];
        r.budget = std::stoull(cells[4]);
        r.replication = std::stoull(cells[5]);
        r.seed = std::stoull(cells[6]);
        if (!cells[7].empty()) r.value = std::stod(cells[7]);
        r.status = cells[8];
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed row");
      }
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::size_t, std::string, std::size_t>;
  std::map<Key, std::size_t> index;
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    Key key{r.scenario, r.model_id, r.T, r.decay, r.budget};
    auto [it, inserted] = index.emplace(key, out.size());
    if (inserted) {
      out.push_back({r.scenario, r.model_id, r.T, r.decay, r.budget});
      values.emplace_back();
    }
    if (r.value) {
      values[it->second].push_back(*r.value);
    } else {
      ++out[it->second].failures;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    out[i].n = v.size();
    if (v.empty()) continue;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].stderr_ = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1) /
                                              static_cast<double>(v.size()))
                                  : 0.0;
  }
  return out;
}

void write_summary(const std::vector<SummaryRow>& summary, std::ostream& out) {
  out << std::left << std::setw(18) << "scenario" << std::setw(22) << "model_id" << std::right
      << std::setw(7) << "T" << "  " << std::left << std::setw(18) << "estimator" << std::right
      << std::setw(9) << "budget" << std::setw(5) << "n" << ' ' << std::setw(16) << "mean"
      << ' ' << std::setw(16) << "stderr" << std::setw(7) << "fail" << '\n';
  for (const auto& s : summary) {
    out << std::left << std::setw(18) << s.scenario << std::setw(22) << s.model_id << std::right
        << std::setw(7) << s.T << "  " << std::left << std::setw(18) << s.decay << std::right
        << std::setw(9) << s.budget << std::setw(5) << s.n << ' ' << std::setw(16)
        << (s.n ? format_value(s.mean) : "-") << ' ' << std::setw(16)
        << (s.n ? format_value(s.stderr_) : "-") << std::setw(7) << s.failures << '\n';
  }
}

}  // namespace decfilt
