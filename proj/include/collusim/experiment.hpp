#pragma once

// Seeded trials of the repeated game: condition setup, the round loop, the
// matched-seed condition suite, and convergence-time measurement. Trials are
// independent work units and may run on any number of worker threads.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "learners.hpp"
#include "market.hpp"
#include "rng.hpp"

namespace collusim {

enum class ConditionKind { baseline, platform_only, seller_only, joint };

struct Condition {
  ConditionKind kind = ConditionKind::baseline;
  // used whenever the platform is fixed (baseline / seller_only); also the
  // gatekeeper sweep's explicit-w override
  PlatformDecision fixed_platform{};
  // leading sellers forced to a fixed strategy in seller-learning conditions
  int n_naive_sellers = 0;
  SellerDecision naive_decision{};

  static Condition of(ConditionKind k) {
    Condition c;
    c.kind = k;
    return c;
  }
  bool platform_learns() const {
    return kind == ConditionKind::platform_only || kind == ConditionKind::joint;
  }
  bool sellers_learn() const {
    return kind == ConditionKind::seller_only || kind == ConditionKind::joint;
  }
};

struct ChannelToggles {
  bool position = true;
  bool endorsement = true;
  bool manipulation = true;
  bool decoy = true;
};

enum class AiMode { biased, debiased, true_random };

struct PopulationClass {
  double fraction = 1.0;
  double bias_multiplier = 1.0;
};

struct TrialConfig {
  int n_sellers = 6;
  long rounds = 20000;
  double measure_fraction = 0.40;
  std::uint64_t seed_base = 42;
  BiasParams bias;
  ChannelToggles channels;
  double bias_scale = 1.0;
  double bias_noise_cv = 0.0;
  PayoffParams payoff;
  double override_p = 0.0;
  std::vector<PopulationClass> population;  // empty = single homogeneous class
  StateCodec codec;
  LearnerConfig learner;
  AiMode ai_mode = AiMode::biased;
  std::vector<long> checkpoints;
  bool record_series = false;

  void validate() const {
    if (n_sellers < 4) throw std::invalid_argument("n_sellers must be >= 4");
    if (rounds <= 0) throw std::invalid_argument("rounds must be positive");
    if (measure_fraction <= 0.0 || measure_fraction > 1.0)
      throw std::invalid_argument("measure_fraction must be in (0,1]");
    if (override_p < 0.0 || override_p > 1.0)
      throw std::invalid_argument("override_p must be in [0,1]");
    if (!population.empty()) {
      double total = 0.0;
      for (const auto& pc : population) total += pc.fraction;
      if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("population fractions must sum to 1");
    }
  }
};

struct TrialResult {
  std::uint64_t seed = 0;
  // means over the measurement window
  double cs_mean = 0.0;
  double platform_profit_mean = 0.0;
  double seller_profit_mean = 0.0;  // total across sellers
  double w_mean = 0.0;              // platform/seller strategy diagnostics
  double m_mean = 0.0;
  double b_mean = 0.0;
  std::vector<double> win_rate;  // per seller over the window
  // optional per-round series
  std::vector<double> cs_series;
  std::vector<double> platform_series;
  std::vector<double> seller_profit_series;
  // per checkpoint: round index, trailing-window cs mean, mean |delta table|
  std::vector<long> checkpoint_rounds;
  std::vector<double> checkpoint_cs_trailing;
  std::vector<double> q_delta_per_checkpoint;
};

namespace detail {

inline void scale_biases(BiasParams& p, double k) {
  p.beta_prime *= k;
  p.beta_pos *= k;
  p.beta_rec *= k;
  p.beta_end *= k;
  p.beta_spon *= k;
  p.beta_manip *= k;
  p.beta_dec *= k;
}

// resolve noise draw, global scale and channel toggles into concrete params;
// one entry per consumer class
inline std::vector<BiasParams> effective_bias(const TrialConfig& cfg, Rng& rng) {
  BiasParams p = cfg.bias;
  if (cfg.ai_mode == AiMode::debiased) p = BiasParams::debiased();
  if (cfg.bias_noise_cv > 0.0 && cfg.ai_mode == AiMode::biased) {
    auto draw = [&](double mean, bool nonpositive) {
      double v = rng.normal(mean, cfg.bias_noise_cv * std::abs(mean));
      if (nonpositive) return std::min(v, 0.0);
      return std::max(v, 0.0);
    };
    p.beta_prime = draw(p.beta_prime, false);
    p.beta_pos = draw(p.beta_pos, false);
    p.beta_rec = draw(p.beta_rec, false);
    p.beta_end = draw(p.beta_end, false);
    p.beta_spon = draw(p.beta_spon, true);
    p.beta_manip = draw(p.beta_manip, false);
    p.beta_dec = draw(p.beta_dec, false);
  }
  scale_biases(p, cfg.bias_scale);
  if (!cfg.channels.position) p.beta_prime = p.beta_pos = p.beta_rec = 0.0;
  if (!cfg.channels.endorsement) p.beta_end = p.beta_spon = 0.0;
  if (!cfg.channels.manipulation) {
    p.beta_manip = 0.0;
    if (p.manipulation_form == ManipForm::additive) p.eta = 0.0;
  }
  if (!cfg.channels.decoy) p.beta_dec = 0.0;

  std::vector<BiasParams> classes;
  if (cfg.population.empty()) {
    classes.push_back(p);
  } else {
    for (const auto& pc : cfg.population) {
      BiasParams cp = p;
      scale_biases(cp, pc.bias_multiplier);
      classes.push_back(cp);
    }
  }
  return classes;
}

// trailing-mean history over the last `window` rounds, O(1) per push
class RollingMean {
 public:
  explicit RollingMean(int window) : window_(window), buf_(window, 0.0) {}
  void push(double x) {
    if (count_ >= window_) sum_ -= buf_[head_];
    buf_[head_] = x;
    head_ = (head_ + 1) % window_;
    sum_ += x;
    if (count_ < window_) ++count_;
  }
  bool full() const { return count_ >= window_; }
  // running subtraction can drift a hair below zero on all-zero input
  double mean() const { return count_ ? std::max(0.0, sum_ / count_) : 0.0; }

 private:
  int window_;
  std::vector<double> buf_;
  int head_ = 0;
  int count_ = 0;
  double sum_ = 0.0;
};

inline double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace detail

inline int sample_class(const std::vector<BiasParams>& classes, const TrialConfig& cfg, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < cfg.population.size(); ++k) {
    acc += cfg.population[k].fraction;
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(classes.size()) - 1;
}

inline TrialResult run_trial(const TrialConfig& cfg, const Condition& cond, int trial_index) {
  cfg.validate();
  const std::uint64_t seed = cfg.seed_base + 100ull * static_cast<std::uint64_t>(trial_index);
  Rng rng(seed);

  const Catalog cat = make_catalog(cfg.n_sellers);
  const int n = cat.n;
  const std::vector<BiasParams> classes = detail::effective_bias(cfg, rng);
  const int n_states = cfg.codec.n_states();

  std::vector<Learner> platform;
  if (cond.platform_learns()) platform.emplace_back(cfg.learner, n_states, 32, rng);
  std::vector<Learner> sellers;
  if (cond.sellers_learn())
    for (int i = 0; i < n; ++i) sellers.emplace_back(cfg.learner, n_states, 12, rng);

  detail::RollingMean hist_m(cfg.codec.history_window), hist_b(cfg.codec.history_window);
  int state = 0;

  const long T = cfg.rounds;
  const long window_start = T - static_cast<long>(std::ceil(cfg.measure_fraction * T));
  std::vector<double> cs_series(T), platform_series, seller_series;
  platform_series.resize(T);
  seller_series.resize(T);

  double acc_w = 0.0, acc_m = 0.0, acc_b = 0.0;
  std::vector<long> wins(n, 0);
  long measured = 0;

  TrialResult out;
  out.seed = seed;
  std::size_t next_checkpoint = 0;
  std::vector<double> prev_tables;

  std::vector<int> bids(n);
  std::vector<SellerDecision> sd(n);
  std::vector<int> seller_actions(n, 0);

  for (long t = 0; t < T; ++t) {
    // 1. actions
    PlatformDecision pd = cond.fixed_platform;
    int platform_action = -1;
    if (cond.platform_learns()) {
      platform_action = platform[0].select(state, t, rng);
      pd = decode_platform_action(platform_action);
    }
    for (int i = 0; i < n; ++i) {
      if (cond.sellers_learn() && i >= cond.n_naive_sellers) {
        seller_actions[i] = sellers.empty() ? 0 : sellers[i].select(state, t, rng);
        sd[i] = decode_seller_action(seller_actions[i]);
      } else {
        sd[i] = cond.sellers_learn() ? cond.naive_decision : SellerDecision{0, 0};
      }
      bids[i] = sd[i].b;
    }

    // 2. market mechanics
    const std::vector<int> rank = rank_products(cat, bids, pd.w);
    const std::vector<char> endorsed = assign_endorsement(cat, bids, pd.e);
    const std::vector<char> decoy = assign_decoy(cat, bids, pd.d);
    std::vector<char> sponsored(n);
    for (int i = 0; i < n; ++i) sponsored[i] = bids[i] >= 1;

    // 3. the AI agent's pick
    int winner;
    if (cfg.ai_mode == AiMode::true_random) {
      winner = rng.uniform_int(n);
    } else {
      const BiasParams& bp =
          classes.size() == 1 ? classes[0] : classes[sample_class(classes, cfg, rng)];
      const std::vector<double> util =
          perceived_utilities(cat, rank, endorsed, sponsored, decoy, sd, bp);
      const std::vector<double> prob = choice_distribution(util, bp.temperature);
      winner = sample_winner(prob, rng);
    }
    winner = apply_override(winner, cat, cfg.override_p, rng);

    // 4. payoffs
    const RoundPayoffs pay = round_payoffs(cat, bids, winner, cfg.payoff);
    double seller_total = 0.0;
    for (double s : pay.sellers) seller_total += s;

    // 5. history + successor state
    double m_sum = 0.0, b_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      m_sum += sd[i].m;
      b_sum += sd[i].b;
    }
    hist_m.push(m_sum / n);
    hist_b.push(b_sum / n);
    const int next_state =
        hist_m.full() ? state_index(hist_m.mean(), hist_b.mean(), cfg.codec) : 0;

    // 6. learning
    if (cond.platform_learns()) platform[0].observe(state, platform_action, pay.platform, next_state);
    if (cond.sellers_learn())
      for (int i = cond.n_naive_sellers; i < n; ++i)
        sellers[i].observe(state, seller_actions[i], pay.sellers[i], next_state);
    state = next_state;

    // 7. bookkeeping
    cs_series[t] = pay.cs;
    platform_series[t] = pay.platform;
    seller_series[t] = seller_total;
    if (t >= window_start) {
      acc_w += pd.w;
      acc_m += m_sum / n;
      acc_b += b_sum / n;
      ++wins[winner];
      ++measured;
    }
    if (next_checkpoint < cfg.checkpoints.size() && t + 1 == cfg.checkpoints[next_checkpoint]) {
      const long elapsed = t + 1;
      const long tail = static_cast<long>(std::ceil(cfg.measure_fraction * elapsed));
      double s = 0.0;
      for (long k = elapsed - tail; k < elapsed; ++k) s += cs_series[k];
      out.checkpoint_rounds.push_back(elapsed);
      out.checkpoint_cs_trailing.push_back(s / tail);
      std::vector<double> tables;
      if (cond.platform_learns()) tables = platform[0].flat_table();
      if (cond.sellers_learn())
        for (const auto& sl : sellers) {
          const std::vector<double> ft = sl.flat_table();
          tables.insert(tables.end(), ft.begin(), ft.end());
        }
      out.q_delta_per_checkpoint.push_back(
          prev_tables.empty() ? 0.0 : detail::mean_abs_diff(tables, prev_tables));
      prev_tables = std::move(tables);
      ++next_checkpoint;
    }
  }
  if (cond.platform_learns()) platform[0].finish();
  for (auto& sl : sellers) sl.finish();

  double cs_acc = 0.0, p_acc = 0.0, s_acc = 0.0;
  for (long t = window_start; t < T; ++t) {
    cs_acc += cs_series[t];
    p_acc += platform_series[t];
    s_acc += seller_series[t];
  }
  out.cs_mean = cs_acc / measured;
  out.platform_profit_mean = p_acc / measured;
  out.seller_profit_mean = s_acc / measured;
  out.w_mean = acc_w / measured;
  out.m_mean = acc_m / measured;
  out.b_mean = acc_b / measured;
  out.win_rate.resize(n);
  for (int i = 0; i < n; ++i) out.win_rate[i] = static_cast<double>(wins[i]) / measured;
  if (cfg.record_series) {
    out.cs_series = std::move(cs_series);
    out.platform_series = std::move(platform_series);
    out.seller_profit_series = std::move(seller_series);
  }
  return out;
}

// bounded worker pool over an atomic task index; results land at their own
// indices so output order never depends on scheduling
inline void parallel_for(long n_tasks, int threads, const std::function<void(long)>& fn) {
  if (threads <= 1 || n_tasks <= 1) {
    for (long i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  const int k = std::min<long>(threads, n_tasks);
  pool.reserve(k);
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= n_tasks) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

struct ConditionSuite {
  std::vector<TrialResult> baseline;
  std::vector<TrialResult> platform_only;
  std::vector<TrialResult> seller_only;
  std::vector<TrialResult> joint;

  const std::vector<TrialResult>& by_kind(ConditionKind k) const {
    switch (k) {
      case ConditionKind::baseline: return baseline;
      case ConditionKind::platform_only: return platform_only;
      case ConditionKind::seller_only: return seller_only;
      default: return joint;
    }
  }
  std::vector<TrialResult>& by_kind(ConditionKind k) {
    return const_cast<std::vector<TrialResult>&>(std::as_const(*this).by_kind(k));
  }
};

inline ConditionSuite run_condition_suite(const TrialConfig& cfg, int trials, int threads = 1,
                                          const Condition* joint_override = nullptr) {
  if (trials < 2) throw std::invalid_argument("need at least 2 trials");
  ConditionSuite suite;
  suite.baseline.resize(trials);
  suite.platform_only.resize(trials);
  suite.seller_only.resize(trials);
  suite.joint.resize(trials);
  std::vector<TrialResult>* slots[4] = {&suite.baseline, &suite.platform_only, &suite.seller_only,
                                        &suite.joint};
  const ConditionKind kinds[4] = {ConditionKind::baseline, ConditionKind::platform_only,
                                  ConditionKind::seller_only, ConditionKind::joint};
  parallel_for(4l * trials, threads, [&](long task) {
    const int c = static_cast<int>(task / trials);
    const int t = static_cast<int>(task % trials);
    Condition cond = Condition::of(kinds[c]);
    if (kinds[c] == ConditionKind::joint && joint_override) cond = *joint_override;
    (*slots[c])[t] = run_trial(cfg, cond, t);
  });
  return suite;
}

struct ThresholdStats {
  double threshold_pp = 0.0;
  double mean_round = std::nan("");  // over trials that reach the threshold
  double median_round = std::nan("");
  double fraction_reached = 0.0;
};

// first checkpoint at which the paired trailing-window complementarity crosses
// each threshold
inline std::vector<ThresholdStats> time_to_threshold(const ConditionSuite& suite,
                                                     const std::vector<double>& thresholds_pp) {
  for (double th : thresholds_pp)
    if (th <= 0.0) throw std::invalid_argument("thresholds must be positive");
  const std::size_t trials = suite.baseline.size();
  const std::size_t ncp = suite.baseline.empty() ? 0 : suite.baseline[0].checkpoint_rounds.size();
  std::vector<ThresholdStats> out;
  for (double th : thresholds_pp) {
    std::vector<double> crossing;
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t c = 0; c < ncp; ++c) {
        const double cs0 = suite.baseline[t].checkpoint_cs_trailing[c];
        const double comp = 100.0 *
                            (suite.platform_only[t].checkpoint_cs_trailing[c] +
                             suite.seller_only[t].checkpoint_cs_trailing[c] - cs0 -
                             suite.joint[t].checkpoint_cs_trailing[c]) /
                            cs0;
        if (comp >= th) {
          crossing.push_back(static_cast<double>(suite.baseline[t].checkpoint_rounds[c]));
          break;
        }
      }
    }
    ThresholdStats st;
    st.threshold_pp = th;
    st.fraction_reached = trials ? static_cast<double>(crossing.size()) / trials : 0.0;
    if (!crossing.empty()) {
      double s = 0.0;
      for (double x : crossing) s += x;
      st.mean_round = s / crossing.size();
      std::sort(crossing.begin(), crossing.end());
      const std::size_t m = crossing.size();
      st.median_round = m % 2 ? crossing[m / 2] : 0.5 * (crossing[m / 2 - 1] + crossing[m / 2]);
    }
    out.push_back(st);
  }
  return out;
}

}  // namespace collusim
