#pragma once

// State discretization plus eight tabular learners behind one select/observe
// contract. Each agent owns one Learner; trials own their agents; nothing here
// is shared across threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace collusim {

struct StateCodec {
  std::vector<double> manip_bins = {0.0, 0.75, 1.5, 2.25};
  std::vector<double> bid_bins = {0.0, 0.5, 1.0, 1.5};
  int history_window = 100;

  int n_states() const {
    return static_cast<int>(manip_bins.size() * bid_bins.size());
  }

  // 4x4 default; 2x2 and 8x8 variants share the same end points
  static StateCodec with_bins(int bins_per_axis) {
    StateCodec c;
    c.manip_bins.resize(bins_per_axis);
    c.bid_bins.resize(bins_per_axis);
    for (int k = 0; k < bins_per_axis; ++k) {
      c.manip_bins[k] = 3.0 * k / bins_per_axis;
      c.bid_bins[k] = 2.0 * k / bins_per_axis;
    }
    return c;
  }
};

inline int bin_of(double x, const std::vector<double>& bounds) {
  int k = 0;
  for (std::size_t j = 1; j < bounds.size(); ++j)
    if (x >= bounds[j]) k = static_cast<int>(j);
  return k;
}

inline int state_index(double recent_manip_mean, double recent_bid_mean, const StateCodec& codec) {
  if (recent_manip_mean < 0.0 || recent_bid_mean < 0.0)
    throw std::invalid_argument("negative history mean");
  const int mi = bin_of(recent_manip_mean, codec.manip_bins);
  const int bi = bin_of(recent_bid_mean, codec.bid_bins);
  return mi * static_cast<int>(codec.bid_bins.size()) + bi;
}

enum class Algorithm {
  qlearning,
  sarsa,
  gradient_bandit,
  ucb,
  thompson,
  actor_critic,
  reinforce,
  exp3,
};

struct LearnerConfig {
  Algorithm algorithm = Algorithm::qlearning;
  double alpha = 0.12;
  double gamma = 0.90;
  double eps0 = 0.25;
  double eps_decay = 0.9995;
  double eps_min = 0.02;
  double ucb_c = 2.0;
  double ac_alpha_v = 0.15;
  double ac_alpha_theta = 0.10;
  double ac_tau = 1.0;
  double reinforce_alpha = 0.05;
  int reinforce_episode = 100;
  double exp3_gamma = 0.1;
  double q_init_range = 0.01;
};

inline double epsilon_at(long t, const LearnerConfig& cfg) {
  return std::max(cfg.eps_min, cfg.eps0 * std::pow(cfg.eps_decay, static_cast<double>(t)));
}

inline int argmax_row(const std::vector<double>& row) {
  int best = 0;
  for (std::size_t a = 1; a < row.size(); ++a)
    if (row[a] > row[best]) best = static_cast<int>(a);
  return best;  // ties resolve to the lowest index
}

inline int select_eps_greedy(const std::vector<double>& row, double eps, Rng& rng) {
  if (rng.uniform() < eps) return rng.uniform_int(static_cast<int>(row.size()));
  return argmax_row(row);
}

inline int sample_categorical(const std::vector<double>& prob, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < prob.size(); ++a) {
    acc += prob[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(prob.size()) - 1;
}

inline std::vector<double> softmax_policy(const std::vector<double>& prefs, double tau) {
  double m = prefs[0];
  for (double h : prefs) m = std::max(m, h);
  std::vector<double> p(prefs.size());
  double z = 0.0;
  for (std::size_t a = 0; a < prefs.size(); ++a) {
    p[a] = std::exp((prefs[a] - m) / tau);
    z += p[a];
  }
  for (double& x : p) x /= z;
  return p;
}

// One agent's learning state. select() is called once per round, then
// observe() with the realized reward and successor state. SARSA defers its
// update one step because it needs the action actually taken at s'.
class Learner {
 public:
  Learner(const LearnerConfig& cfg, int n_states, int n_actions, Rng& rng)
      : cfg_(cfg), n_states_(n_states), n_actions_(n_actions) {
    switch (cfg_.algorithm) {
      case Algorithm::qlearning:
      case Algorithm::sarsa:
        q_.assign(n_states_, std::vector<double>(n_actions_));
        for (auto& row : q_)
          for (double& v : row) v = rng.uniform(-cfg_.q_init_range, cfg_.q_init_range);
        break;
      case Algorithm::gradient_bandit:
        h_.assign(n_actions_, 0.0);
        break;
      case Algorithm::ucb:
        counts_.assign(n_actions_, 0);
        means_.assign(n_actions_, 0.0);
        break;
      case Algorithm::thompson:
        ts_a_.assign(n_actions_, 1.0);
        ts_b_.assign(n_actions_, 1.0);
        break;
      case Algorithm::actor_critic:
        theta_.assign(n_states_, std::vector<double>(n_actions_, 0.0));
        value_.assign(n_states_, 0.0);
        break;
      case Algorithm::reinforce:
        theta_.assign(n_states_, std::vector<double>(n_actions_, 0.0));
        break;
      case Algorithm::exp3:
        weights_.assign(n_states_, std::vector<double>(n_actions_, 1.0));
        break;
    }
  }

  int select(int s, long t, Rng& rng) {
    switch (cfg_.algorithm) {
      case Algorithm::qlearning:
      case Algorithm::sarsa: {
        const int a = select_eps_greedy(q_[s], epsilon_at(t, cfg_), rng);
        if (cfg_.algorithm == Algorithm::sarsa && pending_) {
          // now that a' is known, finish last round's update
          q_[pend_s_][pend_a_] +=
              cfg_.alpha * (pend_r_ + cfg_.gamma * q_[s][a] - q_[pend_s_][pend_a_]);
          pending_ = false;
        }
        return a;
      }
      case Algorithm::gradient_bandit:
        return sample_categorical(softmax_policy(h_, 1.0), rng);
      case Algorithm::ucb: {
        ++ucb_t_;
        for (int a = 0; a < n_actions_; ++a)
          if (counts_[a] == 0) return a;
        int best = 0;
        double best_v = -1e300;
        for (int a = 0; a < n_actions_; ++a) {
          const double v =
              means_[a] + cfg_.ucb_c * std::sqrt(std::log(static_cast<double>(ucb_t_)) / counts_[a]);
          if (v > best_v) {
            best_v = v;
            best = a;
          }
        }
        return best;
      }
      case Algorithm::thompson: {
        int best = 0;
        double best_v = -1.0;
        for (int a = 0; a < n_actions_; ++a) {
          const double v = rng.beta(ts_a_[a], ts_b_[a]);
          if (v > best_v) {
            best_v = v;
            best = a;
          }
        }
        return best;
      }
      case Algorithm::actor_critic: {
        std::vector<double> prefs(theta_[s]);
        return sample_categorical(softmax_policy(prefs, cfg_.ac_tau), rng);
      }
      case Algorithm::reinforce:
        return sample_categorical(softmax_policy(theta_[s], 1.0), rng);
      case Algorithm::exp3:
        return sample_categorical(exp3_policy(s), rng);
    }
    return 0;
  }

  void observe(int s, int a, double r, int s_next) {
    if (!std::isfinite(r)) throw std::invalid_argument("non-finite reward");
    switch (cfg_.algorithm) {
      case Algorithm::qlearning: {
        const double target = r + cfg_.gamma * *std::max_element(q_[s_next].begin(), q_[s_next].end());
        q_[s][a] += cfg_.alpha * (target - q_[s][a]);
        break;
      }
      case Algorithm::sarsa:
        pend_s_ = s;
        pend_a_ = a;
        pend_r_ = r;
        pending_ = true;
        break;
      case Algorithm::gradient_bandit: {
        const std::vector<double> pi = softmax_policy(h_, 1.0);
        const double adv = r - mean_reward_;
        for (int k = 0; k < n_actions_; ++k) {
          if (k == a)
            h_[k] += cfg_.alpha * adv * (1.0 - pi[k]);
          else
            h_[k] -= cfg_.alpha * adv * pi[k];
        }
        ++reward_n_;
        mean_reward_ += (r - mean_reward_) / reward_n_;
        break;
      }
      case Algorithm::ucb:
        ++counts_[a];
        means_[a] += (r - means_[a]) / counts_[a];
        break;
      case Algorithm::thompson: {
        const double p = std::clamp((r + 1.0) / 2.0, 0.0, 1.0);
        ts_a_[a] += p;
        ts_b_[a] += 1.0 - p;
        break;
      }
      case Algorithm::actor_critic: {
        const double delta = r + cfg_.gamma * value_[s_next] - value_[s];
        value_[s] += cfg_.ac_alpha_v * delta;
        theta_[s][a] += cfg_.ac_alpha_theta * delta;
        break;
      }
      case Algorithm::reinforce:
        episode_.push_back({s, a, r});
        if (static_cast<int>(episode_.size()) >= cfg_.reinforce_episode) flush_episode();
        break;
      case Algorithm::exp3: {
        const std::vector<double> pi = exp3_policy(s);
        const double r_norm = std::clamp((r + 1.0) / 3.0, 0.0, 1.0);
        const double r_hat = r_norm / pi[a];
        weights_[s][a] *= std::exp(cfg_.exp3_gamma * r_hat / n_actions_);
        break;
      }
    }
  }

  // flush any partial REINFORCE episode; also terminates a pending SARSA
  // update with the bootstrap dropped (end of trial, no successor action)
  void finish() {
    if (cfg_.algorithm == Algorithm::reinforce && !episode_.empty()) flush_episode();
    if (cfg_.algorithm == Algorithm::sarsa && pending_) {
      q_[pend_s_][pend_a_] += cfg_.alpha * (pend_r_ - q_[pend_s_][pend_a_]);
      pending_ = false;
    }
  }

  const std::vector<std::vector<double>>& q_table() const { return q_; }

  std::vector<double> flat_table() const {
    std::vector<double> out;
    const std::vector<std::vector<double>>* src = nullptr;
    switch (cfg_.algorithm) {
      case Algorithm::qlearning:
      case Algorithm::sarsa:
        src = &q_;
        break;
      case Algorithm::actor_critic:
      case Algorithm::reinforce:
        src = &theta_;
        break;
      case Algorithm::exp3:
        src = &weights_;
        break;
      case Algorithm::gradient_bandit:
        return h_;
      case Algorithm::ucb:
        return means_;
      case Algorithm::thompson: {
        std::vector<double> out2(ts_a_);
        out2.insert(out2.end(), ts_b_.begin(), ts_b_.end());
        return out2;
      }
    }
    for (const auto& row : *src) out.insert(out.end(), row.begin(), row.end());
    return out;
  }

  std::vector<double> exp3_policy(int s) const {
    double z = 0.0;
    for (double w : weights_[s]) z += w;
    std::vector<double> pi(n_actions_);
    for (int a = 0; a < n_actions_; ++a)
      pi[a] = (1.0 - cfg_.exp3_gamma) * weights_[s][a] / z + cfg_.exp3_gamma / n_actions_;
    return pi;
  }

  std::vector<double> policy(int s) const {
    switch (cfg_.algorithm) {
      case Algorithm::gradient_bandit:
        return softmax_policy(h_, 1.0);
      case Algorithm::actor_critic:
        return softmax_policy(theta_[s], cfg_.ac_tau);
      case Algorithm::reinforce:
        return softmax_policy(theta_[s], 1.0);
      case Algorithm::exp3:
        return exp3_policy(s);
      default:
        throw std::logic_error("no stochastic policy for this algorithm");
    }
  }

 private:
  struct Step {
    int s;
    int a;
    double r;
  };

  void flush_episode() {
    double g = 0.0;
    for (int k = static_cast<int>(episode_.size()) - 1; k >= 0; --k) {
      g = episode_[k].r + cfg_.gamma * g;
      theta_[episode_[k].s][episode_[k].a] += cfg_.reinforce_alpha * g;
    }
    episode_.clear();
  }

  LearnerConfig cfg_;
  int n_states_;
  int n_actions_;

  std::vector<std::vector<double>> q_;        // qlearning / sarsa
  std::vector<double> h_;                     // gradient bandit preferences
  double mean_reward_ = 0.0;
  long reward_n_ = 0;
  std::vector<long> counts_;                  // ucb
  std::vector<double> means_;
  long ucb_t_ = 0;
  std::vector<double> ts_a_, ts_b_;           // thompson pseudo-counts
  std::vector<std::vector<double>> theta_;    // actor-critic / reinforce
  std::vector<double> value_;
  std::vector<std::vector<double>> weights_;  // exp3
  std::vector<Step> episode_;

  bool pending_ = false;  // sarsa one-step delay
  int pend_s_ = 0;
  int pend_a_ = 0;
  double pend_r_ = 0.0;
};

}  // namespace collusim
