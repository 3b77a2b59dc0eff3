#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "collusim/analysis.hpp"

using namespace collusim;

TEST_CASE("config validation rejects degenerate inputs before simulation") {
  TrialConfig cfg;
  cfg.rounds = 0;
  CHECK_THROWS_AS(run_trial(cfg, Condition::of(ConditionKind::baseline), 0),
                  std::invalid_argument);
  cfg = TrialConfig{};
  cfg.measure_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrialConfig{};
  cfg.n_sellers = 3;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrialConfig{};
  cfg.override_p = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrialConfig{};
  cfg.population = {{0.5, 1.0}, {0.4, 0.5}};  // fractions must sum to 1
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("trial seeding and determinism") {
  TrialConfig cfg;
  cfg.rounds = 3000;
  const TrialResult a = run_trial(cfg, Condition::of(ConditionKind::joint), 3);
  const TrialResult b = run_trial(cfg, Condition::of(ConditionKind::joint), 3);
  CHECK(a.seed == 42 + 300);
  CHECK(a.cs_mean == b.cs_mean);
  CHECK(a.platform_profit_mean == b.platform_profit_mean);
  CHECK(a.w_mean == b.w_mean);
  CHECK(a.win_rate == b.win_rate);
}

TEST_CASE("suites are identical for any thread count") {
  TrialConfig cfg;
  cfg.rounds = 2000;
  const ConditionSuite s1 = run_condition_suite(cfg, 6, 1);
  const ConditionSuite s4 = run_condition_suite(cfg, 6, 4);
  for (int t = 0; t < 6; ++t) {
    CHECK(s1.baseline[t].cs_mean == s4.baseline[t].cs_mean);
    CHECK(s1.platform_only[t].cs_mean == s4.platform_only[t].cs_mean);
    CHECK(s1.seller_only[t].cs_mean == s4.seller_only[t].cs_mean);
    CHECK(s1.joint[t].cs_mean == s4.joint[t].cs_mean);
  }
  CHECK_THROWS_AS(run_condition_suite(cfg, 1), std::invalid_argument);
}

TEST_CASE("baseline condition reproduces the analytic consumer surplus") {
  TrialConfig cfg;
  std::vector<double> cs(100);
  for (int t = 0; t < 100; ++t)
    cs[t] = run_trial(cfg, Condition::of(ConditionKind::baseline), t).cs_mean;
  const double mean = mean_of(cs);
  CHECK(mean == Catch::Approx(0.303).margin(0.002));
  CHECK(sd_of(cs) <= 0.004);
}

TEST_CASE("platform-only with naive sellers earns zero bid revenue at tau=0") {
  TrialConfig cfg;
  cfg.rounds = 5000;
  for (int t = 0; t < 3; ++t) {
    const TrialResult r = run_trial(cfg, Condition::of(ConditionKind::platform_only), t);
    CHECK(r.platform_profit_mean == 0.0);
    CHECK(r.b_mean == 0.0);
    CHECK(r.m_mean == 0.0);
  }
}

TEST_CASE("all channels off equals the debiased agent on matched seeds") {
  TrialConfig off;
  off.rounds = 4000;
  off.channels = {false, false, false, false};
  TrialConfig deb;
  deb.rounds = 4000;
  deb.ai_mode = AiMode::debiased;
  for (int t = 0; t < 3; ++t) {
    const TrialResult a = run_trial(off, Condition::of(ConditionKind::joint), t);
    const TrialResult b = run_trial(deb, Condition::of(ConditionKind::joint), t);
    CHECK(a.cs_mean == b.cs_mean);
    CHECK(a.win_rate == b.win_rate);
  }
}

TEST_CASE("degenerate heterogeneous population equals the homogeneous run") {
  TrialConfig mixed;
  mixed.rounds = 4000;
  mixed.population = {{1.0, 1.0}};
  TrialConfig plain;
  plain.rounds = 4000;
  for (int t = 0; t < 3; ++t) {
    const TrialResult a = run_trial(mixed, Condition::of(ConditionKind::joint), t);
    const TrialResult b = run_trial(plain, Condition::of(ConditionKind::joint), t);
    CHECK(a.cs_mean == b.cs_mean);
    CHECK(a.win_rate == b.win_rate);
  }
}

TEST_CASE("true-random AI spreads wins uniformly") {
  TrialConfig cfg;
  cfg.ai_mode = AiMode::true_random;
  const TrialResult r = run_trial(cfg, Condition::of(ConditionKind::baseline), 0);
  const long window = 8000;  // final 40% of 20k rounds
  const double sigma = std::sqrt((1.0 / 6.0) * (5.0 / 6.0) / window);
  for (double wr : r.win_rate) CHECK(std::abs(wr - 1.0 / 6.0) < 3.0 * sigma);
}

TEST_CASE("measured means are recomputable from the stored series") {
  TrialConfig cfg;
  cfg.rounds = 3000;
  cfg.record_series = true;
  const TrialResult r = run_trial(cfg, Condition::of(ConditionKind::joint), 0);
  REQUIRE(r.cs_series.size() == 3000);
  const long start = 3000 - 1200;
  double cs = 0.0, plat = 0.0, sell = 0.0;
  for (long t = start; t < 3000; ++t) {
    cs += r.cs_series[t];
    plat += r.platform_series[t];
    sell += r.seller_profit_series[t];
  }
  CHECK(r.cs_mean == Catch::Approx(cs / 1200).margin(1e-12));
  CHECK(r.platform_profit_mean == Catch::Approx(plat / 1200).margin(1e-12));
  CHECK(r.seller_profit_mean == Catch::Approx(sell / 1200).margin(1e-12));
}

TEST_CASE("naive seller overrides pin the seller decisions") {
  TrialConfig cfg;
  cfg.rounds = 4000;
  Condition c = Condition::of(ConditionKind::joint);
  c.n_naive_sellers = 6;
  c.naive_decision = SellerDecision{2, 1};
  const TrialResult r = run_trial(cfg, c, 0);
  CHECK(r.m_mean == Catch::Approx(2.0).margin(1e-12));
  CHECK(r.b_mean == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("gatekeeper override fixes the ranking weight") {
  TrialConfig cfg;
  cfg.rounds = 4000;
  Condition c = Condition::of(ConditionKind::seller_only);
  c.fixed_platform.w = 1.0;
  const TrialResult r = run_trial(cfg, c, 0);
  CHECK(r.w_mean == 1.0);
}

TEST_CASE("checkpoints record trailing surplus and table movement") {
  TrialConfig cfg;
  cfg.rounds = 4000;
  cfg.checkpoints = {1000, 2000, 3000, 4000};
  const TrialResult r = run_trial(cfg, Condition::of(ConditionKind::joint), 0);
  REQUIRE(r.checkpoint_rounds == std::vector<long>{1000, 2000, 3000, 4000});
  REQUIRE(r.checkpoint_cs_trailing.size() == 4);
  for (double cs : r.checkpoint_cs_trailing) {
    CHECK(cs > 0.0);
    CHECK(cs < 1.0);
  }
  REQUIRE(r.q_delta_per_checkpoint.size() == 4);
  CHECK(r.q_delta_per_checkpoint[0] == 0.0);  // no previous snapshot
  for (std::size_t k = 1; k < 4; ++k) CHECK(r.q_delta_per_checkpoint[k] > 0.0);
}

TEST_CASE("time_to_threshold aggregation") {
  TrialConfig cfg;
  cfg.rounds = 6000;
  cfg.checkpoints = {1000, 2000, 3000, 4000, 5000, 6000};
  const ConditionSuite suite = run_condition_suite(cfg, 4);
  CHECK_THROWS_AS(time_to_threshold(suite, {0.0}), std::invalid_argument);
  const std::vector<ThresholdStats> st = time_to_threshold(suite, {1e6});
  CHECK(st[0].fraction_reached == 0.0);
  CHECK(std::isnan(st[0].mean_round));  // undefined when nothing crosses
}
