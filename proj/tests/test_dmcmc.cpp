#include <doctest.h>

#include <cmath>
#include <map>

#include "decfilt/diagnostics.hpp"
#include "decfilt/dmcmc.hpp"
#include "decfilt/exact.hpp"
#include "oracles.hpp"

using namespace decfilt;

TEST_CASE("gibbs_conditional on C1") {
  const auto c1 = canonical_c1();
  SUBCASE("interior slice") {
    // oracle: normalize (0.7*0.8*0.7, 0.3*0.2*0.3)
    const double a = 0.7 * 0.8 * 0.7, b = 0.3 * 0.2 * 0.3;
    auto p = gibbs_conditional(c1, 2, 0, 0, 0);
    CHECK(p[0] == doctest::Approx(a / (a + b)).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.9561).epsilon(1e-3));
    CHECK(p[1] == doctest::Approx(0.0439).epsilon(1e-2));
  }
  SUBCASE("first slice uses the prior") {
    const double a = 0.5 * 0.8 * 0.7, b = 0.5 * 0.2 * 0.3;
    auto p = gibbs_conditional(c1, 1, std::nullopt, 0, 0);
    CHECK(p[0] == doctest::Approx(a / (a + b)).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.9032).epsilon(1e-3));
  }
  SUBCASE("last slice drops the forward factor") {
    auto p = gibbs_conditional(c1, 5, 1, std::nullopt, 0);
    CHECK(p[0] == doctest::Approx(0.3 * 0.8 / (0.3 * 0.8 + 0.7 * 0.2)));
  }
}

TEST_CASE("uniform transitions make the conditional blanket-free") {
  DiscreteHMM m(3, 2, {0.2, 0.3, 0.5}, std::vector<double>(9, 1.0 / 3),
                {0.9, 0.1, 0.5, 0.5, 0.2, 0.8});
  const auto ref = gibbs_conditional(m, 2, 0, 0, 1);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      auto p = gibbs_conditional(m, 2, a, b, 1);
      for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(ref[i]));
    }
  }
  // proportional to the observation column
  CHECK(ref[0] == doctest::Approx(0.1 / 1.4));
}

TEST_CASE("inconsistent blanket") {
  DiscreteHMM m(2, 2, {0.5, 0.5}, {1, 0, 0, 1}, {0.5, 0.5, 0.5, 0.5});
  try {
    gibbs_conditional(m, 4, 0, 1, 0);
    FAIL("expected InconsistentBlanket");
  } catch (const InconsistentBlanket& e) {
    CHECK(e.t() == 4);
  }
}

TEST_CASE("single-slice chain converges to the T=1 posterior") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 10000;
  cfg.seed = 3;
  DecayedMcmcFilter chain(c1, cfg);
  chain.observe(0);
  CHECK(chain.length() == 1);
  const auto exact = forward_filter(c1, {0}).beliefs.back();
  CHECK(tv_distance(chain.estimate(), exact) < 0.05);
}

TEST_CASE("frozen chain for a deterministic model") {
  DiscreteHMM m(2, 2, {1, 0}, {1, 0, 0, 1}, {0.6, 0.4, 0.3, 0.7});
  ChainConfig cfg;
  cfg.steps_per_update = 200;
  cfg.schedule = DecaySchedule(decay::Uniform{});
  DecayedMcmcFilter chain(m, cfg);
  for (int y : {0, 1, 1, 0, 1}) chain.observe(y);
  CHECK(chain.trajectory() == Trajectory(5, 0));
  CHECK(chain.estimate()[0] == 1.0);
}

TEST_CASE("window of one only touches the last slice") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.schedule = DecaySchedule(decay::FixedWindow{1});
  cfg.steps_per_update = 1;
  DecayedMcmcFilter chain(c1, cfg, {0, 1, 0, 0, 1}, {1, 1, 1, 1, 1});
  for (int i = 0; i < 500; ++i) {
    chain.step();
    REQUIRE(chain.last_site() == 5);
  }
  CHECK(Trajectory(chain.trajectory().begin(), chain.trajectory().end() - 1) == Trajectory(4, 1));
}

TEST_CASE("evidence limit freezes old slices") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.schedule = DecaySchedule(decay::Uniform{}, 3);
  cfg.steps_per_update = 1;
  DecayedMcmcFilter chain(c1, cfg, {0, 1, 0, 0, 1, 1, 0}, Trajectory(7, 1));
  for (int i = 0; i < 2000; ++i) {
    chain.step();
    REQUIRE(chain.last_site() >= 5);
  }
  for (int t = 0; t < 4; ++t) CHECK(chain.trajectory()[t] == 1);
}

TEST_CASE("count bookkeeping") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 50;
  cfg.burn_in = 20;
  DecayedMcmcFilter chain(c1, cfg);
  CHECK_THROWS_AS(chain.estimate(), std::logic_error);
  chain.extend(0);
  for (std::size_t s = 1; s <= 60; ++s) {
    chain.step();
    std::uint64_t total = 0;
    for (auto c : chain.counts()) total += c;
    REQUIRE(total == (s > cfg.burn_in ? s - cfg.burn_in : 0));
  }
  chain.observe(1);
  std::uint64_t total = 0;
  for (auto c : chain.counts()) total += c;
  CHECK(total == cfg.steps_per_update - cfg.burn_in);
  CHECK(chain.steps_taken() == cfg.steps_per_update);
  CHECK(chain.trajectory().size() == chain.evidence().size());
}

TEST_CASE("estimate normalizes counts") {
  // (30, 10) -> (0.75, 0.25): drive a deterministic chain to those tallies
  DiscreteHMM m(2, 2, {1, 0}, {1, 0, 0, 1}, {0.5, 0.5, 0.5, 0.5});
  ChainConfig cfg;
  cfg.steps_per_update = 1;
  DecayedMcmcFilter a(m, cfg, {0}, {0});
  a.run(30);
  CHECK(a.estimate()[0] == 1.0);
  DiscreteHMM flip(2, 2, {0.75, 0.25}, {0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5});
  DecayedMcmcFilter b(flip, cfg, {0}, {0});
  b.run(40000);
  CHECK(b.estimate()[0] == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("config validation") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 10;
  cfg.burn_in = 10;
  CHECK_THROWS_AS(DecayedMcmcFilter(c1, cfg), std::invalid_argument);
  cfg.burn_in = 0;
  DecayedMcmcFilter chain(c1, cfg);
  CHECK_THROWS_AS(chain.observe(2), std::out_of_range);
  CHECK_THROWS_AS(chain.step(), std::logic_error);
  CHECK_THROWS_AS(DecayedMcmcFilter(c1, cfg, {0, 1}, {0}), std::invalid_argument);
}

TEST_CASE("determinism") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 300;
  cfg.seed = 11;
  DecayedMcmcFilter a(c1, cfg), b(c1, cfg);
  for (int y : {0, 1, 1, 0, 1, 0}) {
    a.observe(y);
    b.observe(y);
  }
  CHECK(a.trajectory() == b.trajectory());
  CHECK(a.counts() == b.counts());
}

TEST_CASE("online C1 estimate after two observations") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 100000;
  cfg.seed = 21;
  DecayedMcmcFilter chain(c1, cfg);
  chain.observe(0);
  chain.observe(0);
  const auto exact = oracle::filtered_last(c1, {0, 0});
  CHECK(tv_distance(chain.estimate().probs, exact) < 0.02);
  CHECK(chain.estimate()[0] == doctest::Approx(0.8671).epsilon(0.03));
}

TEST_CASE("long-run estimate equals the smoothed last slice") {
  const auto c1 = canonical_c1();
  const EvidenceSequence y{0, 1, 1, 0, 0, 1, 0, 0};
  ChainConfig cfg;
  cfg.steps_per_update = 400000;
  cfg.burn_in = 1000;
  cfg.seed = 5;
  DecayedMcmcFilter chain(c1, cfg);
  for (int v : y) chain.observe(v);
  CHECK(tv_distance(chain.estimate(), smooth(c1, y).per_t.back()) < 0.01);
}

TEST_CASE("property: stationarity from exact posterior draws") {
  Rng rng = make_stream(404);
  for (int trial = 0; trial < 4; ++trial) {
    const int k = 2 + trial % 2;
    const auto m = make_random_hmm(k, 3, 0.2 + 0.1 * trial, 0.5, 100 + trial);
    const auto y = simulate(m, 4 + trial % 3, 7 + trial).second;
    const auto target = smooth(m, y);
    ChainConfig cfg;
    cfg.steps_per_update = 1;
    cfg.schedule = DecaySchedule(decay::Uniform{});
    cfg.seed = 1000 + trial;
    DecayedMcmcFilter chain(m, cfg, y, sample_posterior_trajectory(m, y, rng));
    std::vector<std::vector<double>> hist(y.size(), std::vector<double>(k, 0.0));
    const int steps = 100000;
    for (int s = 0; s < steps; ++s) {
      chain.step();
      for (std::size_t t = 0; t < y.size(); ++t) hist[t][chain.trajectory()[t]] += 1.0 / steps;
    }
    for (std::size_t t = 0; t < y.size(); ++t) CHECK(tv_distance(hist[t], target.per_t[t].probs) < 0.02);
  }
}

TEST_CASE("property: decayed kernel preserves the posterior across an ensemble") {
  const auto m = make_random_hmm(3, 3, 0.6, 0.5, 77);
  const auto y = simulate(m, 6, 78).second;
  const auto target = smooth(m, y);
  Rng rng = make_stream(79);
  const int chains = 4000;
  std::vector<std::vector<double>> hist(y.size(), std::vector<double>(3, 0.0));
  for (int c = 0; c < chains; ++c) {
    ChainConfig cfg;
    cfg.steps_per_update = 1;
    cfg.seed = 5000 + c;
    DecayedMcmcFilter chain(m, cfg, y, sample_posterior_trajectory(m, y, rng));
    chain.run(40);
    for (std::size_t t = 0; t < y.size(); ++t) hist[t][chain.trajectory()[t]] += 1.0 / chains;
  }
  for (std::size_t t = 0; t < y.size(); ++t) CHECK(tv_distance(hist[t], target.per_t[t].probs) < 0.03);
}

TEST_CASE("property: ergodicity over trajectories") {
  const auto m = make_random_hmm(2, 2, 0.5, 0.4, 9);
  const EvidenceSequence y{1, 0, 0, 1};
  const auto e = oracle::enumerate(m, y);
  for (const Trajectory& start : {Trajectory{0, 0, 0, 0}, Trajectory{1, 1, 1, 1}, Trajectory{0, 1, 0, 1}}) {
    ChainConfig cfg;
    cfg.steps_per_update = 1;
    cfg.schedule = DecaySchedule(decay::Uniform{});
    cfg.seed = static_cast<std::uint64_t>(start[1] * 2 + start[2]);
    DecayedMcmcFilter chain(m, cfg, y, start);
    std::map<Trajectory, double> freq;
    const int steps = 1000000;
    for (int s = 0; s < steps; ++s) {
      chain.step();
      freq[chain.trajectory()] += 1.0 / steps;
    }
    double tv = 0.0;
    for (const auto& [x, p] : e.posterior) tv += std::abs(p - freq[x]);
    CHECK(0.5 * tv < 0.05);
  }
}

TEST_CASE("memory does not grow with steps") {
  const auto c1 = canonical_c1();
  ChainConfig cfg;
  cfg.steps_per_update = 1;
  DecayedMcmcFilter chain(c1, cfg, {0, 1, 0}, {0, 0, 0});
  chain.run(100000);
  CHECK(chain.trajectory().size() == 3);
  CHECK(chain.counts().size() == 2);
  CHECK(chain.total_steps() == 100000);
}
