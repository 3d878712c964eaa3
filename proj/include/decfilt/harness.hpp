#ifndef DECFILT_HARNESS_HPP
#define DECFILT_HARNESS_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "decfilt/decay.hpp"
#include "decfilt/models.hpp"
#include "decfilt/skf.hpp"

namespace decfilt {

enum class Scenario {
  stationarity,
  error_vs_samples,
  error_vs_history,
  mixing_vs_history,
  pf_compare,
  skf_track,
};

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Bad configuration. The message starts with the offending field path.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Where a discrete model comes from: a named preset, a model file, or the
/// random generator.
struct ModelSource {
  std::string preset;  ///< "c1", "slow", "fast", "large8"
  std::string path;
  struct Generator {
    int states = 2;
    int obs = 2;
    double transition_sharpness = 0.5;
    double observation_sharpness = 0.5;
    std::uint64_t seed = 0;
  };
  std::optional<Generator> generator;
};

/// Named preset models. "slow" and "fast" differ in transition sharpness
/// (0.9 vs 0.2); "large8" is the 8-state model used against the particle filter.
DiscreteHMM preset_model(const std::string& name);
/// Default two-regime random walk: switch values {-1, +1} i.i.d.
SwitchingKF preset_skf();

struct ExperimentConfig {
  Scenario scenario = Scenario::error_vs_samples;
  ModelSource model;
  std::optional<SwitchingKF> skf;
  std::vector<std::size_t> history_lengths;  ///< "T"
  std::vector<std::size_t> budgets;
  std::vector<std::string> decays;
  std::vector<std::size_t> particles;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::string output;
  std::size_t limit = DecaySchedule::kUnbounded;
  std::size_t burn_in = 0;
  std::size_t gap = 1;
  std::size_t warmup_steps = 0;
  double epsilon = 0.05;
  std::size_t chains = 1000;
  std::size_t max_steps = std::size_t{1} << 16;
};

/// Parses and validates a JSON config. Relative model paths resolve against
/// `base_dir` when it is nonempty.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = "");
ExperimentConfig read_config_file(const std::string& path);
void validate(const ExperimentConfig& config);

struct ResultRow {
  std::string scenario;
  std::string model_id;
  std::size_t T = 0;
  std::string decay;  ///< decay label, or "pf" for the particle filter
  std::size_t budget = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::optional<double> value;
  std::string status = "ok";
};

struct ExperimentResult {
  std::string value_column;  ///< "error" or "tau_m"
  std::vector<ResultRow> rows;
  std::string model_id;
  std::optional<double> eta;  ///< mixing parameter of the discrete model
};

/// Runs every sweep cell in deterministic order. Estimator faults become
/// row statuses.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Header `scenario,model_id,T,decay,budget,replication,seed,<value>,status`.
void write_results_csv(const ExperimentResult& result, std::ostream& out);

struct SummaryRow {
  std::string scenario;
  std::string model_id;
  std::size_t T = 0;
  std::string decay;
  std::size_t budget = 0;
  std::size_t n = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Groups rows by (scenario, model_id, T, decay, budget) in first-seen order.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

/// Reads result CSVs; throws std::runtime_error when headers disagree.
std::vector<ResultRow> read_results_csv(const std::vector<std::string>& paths);

void write_summary(const std::vector<SummaryRow>& summary, std::ostream& out);

/// Seed of one (root, replication) cell; the value stored in the seed column.
std::uint64_t cell_seed(std::uint64_t root, std::size_t replication);
/// Estimator stream for a cell, keyed by the estimator label.
std::uint64_t estimator_seed(std::uint64_t cell, const std::string& label);

}  // namespace decfilt

#endif  // DECFILT_HARNESS_HPP
