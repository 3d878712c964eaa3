#ifndef DECFILT_MODELS_HPP
#define DECFILT_MODELS_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "decfilt/random.hpp"

namespace decfilt {

/// Tolerance for row sums of probability tables.
inline constexpr double kProbTolerance = 1e-9;

using Trajectory = std::vector<int>;
using EvidenceSequence = std::vector<int>;

/// Normalized categorical distribution over states.
struct Belief {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

/// Normalizes nonnegative weights in place; throws std::domain_error on zero mass.
Belief normalized(std::vector<double> weights);

class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stationary discrete hidden Markov model. Time starts at t=1 with `prior`
/// giving P(X_1); `transition(i, j)` is P(X_{t+1}=j | X_t=i) and
/// `observation(i, y)` is P(Y_t=y | X_t=i). Tables are row-major.
class DiscreteHMM {
 public:
  DiscreteHMM() = default;
  DiscreteHMM(int n_states, int n_obs, std::vector<double> prior, std::vector<double> transition,
              std::vector<double> observation);

  int n_states() const { return n_states_; }
  int n_obs() const { return n_obs_; }

  double prior(int x) const { return prior_[x]; }
  double transition(int from, int to) const { return transition_[from * n_states_ + to]; }
  double observation(int x, int y) const { return observation_[x * n_obs_ + y]; }

  const std::vector<double>& prior_table() const { return prior_; }
  const std::vector<double>& transition_table() const { return transition_; }
  const std::vector<double>& observation_table() const { return observation_; }

  bool operator==(const DiscreteHMM&) const = default;

 private:
  int n_states_ = 0;
  int n_obs_ = 0;
  std::vector<double> prior_;
  std::vector<double> transition_;
  std::vector<double> observation_;
};

/// One broken invariant. `row` is -1 for the prior and table-wide problems.
struct Violation {
  std::string table;
  int row = -1;
  double residual = 0.0;
  std::string message;
};

/// Every invariant violation; empty means the model is valid.
std::vector<Violation> validate(const DiscreteHMM& model);

/// Throws ModelError listing the violations, if any.
void require_valid(const DiscreteHMM& model);

/// Two-state symmetric reference model: stay 0.7, observe correctly 0.8.
DiscreteHMM canonical_c1();

/// Rows are `sharpness * one_hot(perm[i]) + (1 - sharpness) * uniform`, with
/// the one-hot targets drawn from a seeded permutation. Uniform prior.
DiscreteHMM make_random_hmm(int n_states, int n_obs, double transition_sharpness,
                            double observation_sharpness, std::uint64_t seed);

/// Ancestral sample of (x_1..x_T, y_1..y_T).
std::pair<Trajectory, EvidenceSequence> simulate(const DiscreteHMM& model, std::size_t T,
                                                 std::uint64_t seed);

/// Same model with states relabelled so that new state perm[i] is old state i.
DiscreteHMM permute_states(const DiscreteHMM& model, const std::vector<int>& perm);

// Model files are JSON objects:
//   {"n_states": K, "n_obs": M, "prior": [K],
//    "transition": [[K] x K], "observation": [[M] x K]}
// Numbers are written with round-trip precision.
std::string to_json(const DiscreteHMM& model);
DiscreteHMM hmm_from_json(const std::string& text);
void write_model_file(const DiscreteHMM& model, const std::string& path);
DiscreteHMM read_model_file(const std::string& path);

/// 16-hex-digit FNV-1a digest of the model's canonical serialization.
std::string model_hash(const DiscreteHMM& model);

}  // namespace decfilt

#endif  // DECFILT_MODELS_HPP
