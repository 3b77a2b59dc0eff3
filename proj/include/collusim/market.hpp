#pragma once

// Single-round market mechanics: prices, action decoding, ranking, the biased
// agent's utilities and softmax choice, and payoffs. Everything here is a pure
// function of its arguments (plus an explicit Rng where sampling is involved).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rng.hpp"

namespace collusim {

enum class EndorseRule { quality = 0, bid = 1, hybrid = 2, none = 3 };
enum class ManipForm { multiplicative, additive };

struct BiasParams {
  double alpha = 0.15;       // quality weight
  double beta = 0.30;        // price sensitivity
  double beta_prime = 0.40;  // primacy
  double beta_pos = 0.90;    // top-3 row bonus
  double beta_rec = 0.15;    // last-row recency
  double beta_end = 1.20;    // endorsement badge
  double beta_spon = -0.35;  // sponsored label penalty
  double beta_manip = 0.50;  // manipulation, per level
  double eta = 0.70;         // visibility interaction
  double beta_dec = 0.40;    // decoy boost
  double temperature = 1.0;
  ManipForm manipulation_form = ManipForm::multiplicative;

  static BiasParams debiased() {
    BiasParams p;
    p.beta_prime = p.beta_pos = p.beta_rec = 0.0;
    p.beta_end = p.beta_spon = 0.0;
    p.beta_manip = p.beta_dec = 0.0;
    p.eta = 0.0;
    return p;
  }
};

struct Catalog {
  int n = 0;
  std::vector<double> quality;  // strictly descending by index
  std::vector<double> cost;
  std::vector<double> price;  // derived, cost-plus
  double mu_base = 0.25;
  double mu_q = 0.10;
};

struct PlatformDecision {
  double w = 0.0;  // one of {0, 1/3, 2/3, 1}
  EndorseRule e = EndorseRule::quality;
  int d = 0;
};

struct SellerDecision {
  int m = 0;  // manipulation level 0..3
  int b = 0;  // bid level 0..2
};

struct PayoffParams {
  double kappa = 0.50;      // platform commission on bid spend
  double phi_w = 0.30;      // winner bid cost per level
  double phi_l = 0.02;      // loser bid cost per level
  double take_rate = 0.0;   // tau
};

struct RoundOutcome {
  std::vector<int> rank;         // 1..n display position per seller
  std::vector<char> endorsed;
  std::vector<char> sponsored;
  std::vector<char> decoy_target;
  std::vector<double> utility;
  std::vector<double> choice_prob;
  int winner = -1;
  double cs = 0.0;
  double platform_profit = 0.0;
  std::vector<double> seller_profit;
};

inline const double kBidWeightGrid[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};

// Prices are quoted to the cent: 0.49, 0.45, 0.41, 0.38, 0.34, 0.32 for the
// canonical catalog.
inline void compute_prices(Catalog& cat) {
  cat.price.resize(cat.quality.size());
  for (std::size_t i = 0; i < cat.quality.size(); ++i) {
    const double raw = cat.cost[i] + cat.mu_base + cat.mu_q * cat.quality[i];
    cat.price[i] = std::round(raw * 100.0) / 100.0;
  }
}

inline Catalog default_catalog() {
  Catalog cat;
  cat.n = 6;
  cat.quality = {0.90, 0.75, 0.60, 0.45, 0.30, 0.20};
  cat.cost = {0.15, 0.12, 0.10, 0.08, 0.06, 0.05};
  compute_prices(cat);
  return cat;
}

// Catalogs for market-size variants: linear quality/cost grids spanning the
// same range as the canonical six-seller table.
inline Catalog make_catalog(int n) {
  if (n == 6) return default_catalog();
  if (n < 4) throw std::invalid_argument("market size must be >= 4");
  Catalog cat;
  cat.n = n;
  cat.quality.resize(n);
  cat.cost.resize(n);
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    cat.quality[i] = 0.90 - f * (0.90 - 0.20);
    cat.cost[i] = 0.15 - f * (0.15 - 0.05);
  }
  compute_prices(cat);
  return cat;
}

inline PlatformDecision decode_platform_action(int a) {
  if (a < 0 || a > 31) throw std::out_of_range("platform action out of range");
  PlatformDecision pd;
  pd.d = a % 2;
  pd.e = static_cast<EndorseRule>((a / 2) % 4);
  pd.w = kBidWeightGrid[a / 8];
  return pd;
}

inline SellerDecision decode_seller_action(int a) {
  if (a < 0 || a > 11) throw std::out_of_range("seller action out of range");
  return SellerDecision{a / 3, a % 3};
}

// score_i = (1-w) q_i + w b_i/2, positions in descending score. Among tied
// scores the *lower-quality* seller is placed first. This convention is what
// makes the w=1 regime an actual gatekeeper flip: with no bids to separate
// sellers, a bid-weighted ranking carries no quality signal at all, so the
// display order must not quietly fall back to quality order.
inline std::vector<int> rank_products(const Catalog& cat, const std::vector<int>& bids, double w) {
  const int n = cat.n;
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) score[i] = (1.0 - w) * cat.quality[i] + w * (bids[i] / 2.0);
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a > b;  // tie: higher index = lower quality first
  });
  std::vector<int> rank(n);
  for (int pos = 0; pos < n; ++pos) rank[idx[pos]] = pos + 1;
  return rank;
}

inline double position_visibility(int r, int n) {
  if (n < 4) throw std::invalid_argument("visibility profile needs n >= 4");
  if (r == 1) return 1.0;
  if (r == 2) return 0.75;
  if (r == 3 || r == n) return 0.55;
  return 0.30;
}

// quality: badge to the quality leader. bid and hybrid award the badge to the
// top *positive* bidder (hybrid restricted to sellers with q >= 0.5), ties
// broken by quality then index; with no positive bids a paid placement slot
// stays empty rather than quietly falling back to the quality order.
inline std::vector<char> assign_endorsement(const Catalog& cat, const std::vector<int>& bids,
                                            EndorseRule rule) {
  const int n = cat.n;
  std::vector<char> endorsed(n, 0);
  auto better = [&](int a, int b) {  // does a beat b for the badge?
    if (bids[a] != bids[b]) return bids[a] > bids[b];
    if (cat.quality[a] != cat.quality[b]) return cat.quality[a] > cat.quality[b];
    return a < b;
  };
  switch (rule) {
    case EndorseRule::quality: {
      int best = 0;
      for (int i = 1; i < n; ++i)
        if (cat.quality[i] > cat.quality[best]) best = i;
      endorsed[best] = 1;
      break;
    }
    case EndorseRule::bid: {
      int best = 0;
      for (int i = 1; i < n; ++i)
        if (better(i, best)) best = i;
      if (bids[best] > 0) endorsed[best] = 1;
      break;
    }
    case EndorseRule::hybrid: {
      int best = -1;
      for (int i = 0; i < n; ++i) {
        if (cat.quality[i] < 0.5) continue;
        if (best < 0 || better(i, best)) best = i;
      }
      if (best >= 0 && bids[best] > 0) endorsed[best] = 1;
      break;
    }
    case EndorseRule::none:
      break;
  }
  return endorsed;
}

// Decoy targets the highest bidder, ties broken by quality then index; with
// all-zero bids the tie-break lands on seller 1.
inline std::vector<char> assign_decoy(const Catalog& cat, const std::vector<int>& bids,
                                      int d_flag) {
  const int n = cat.n;
  std::vector<char> target(n, 0);
  if (d_flag == 0) return target;
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (bids[i] > bids[best] ||
        (bids[i] == bids[best] && cat.quality[i] > cat.quality[best]))
      best = i;
  target[best] = 1;
  return target;
}

inline double bias_term(int i, const std::vector<int>& rank, const std::vector<char>& endorsed,
                        const std::vector<char>& sponsored, const std::vector<char>& decoy_target,
                        int m_i, const BiasParams& p) {
  const int n = static_cast<int>(rank.size());
  const int r = rank[i];
  double B = 0.0;
  if (r <= 3) B += p.beta_pos;
  if (r == 1) B += p.beta_prime;
  if (r == n) B += p.beta_rec;
  if (endorsed[i]) B += p.beta_end;
  if (sponsored[i]) B += p.beta_spon;
  const double nu = position_visibility(r, n);
  if (p.manipulation_form == ManipForm::multiplicative)
    B += p.beta_manip * m_i * ((1.0 - p.eta) + p.eta * nu);
  else
    B += p.beta_manip * m_i + p.eta * nu;
  if (decoy_target[i]) B += p.beta_dec;
  return B;
}

inline std::vector<double> perceived_utilities(const Catalog& cat, const std::vector<int>& rank,
                                               const std::vector<char>& endorsed,
                                               const std::vector<char>& sponsored,
                                               const std::vector<char>& decoy_target,
                                               const std::vector<SellerDecision>& sellers,
                                               const BiasParams& p) {
  std::vector<double> u(cat.n);
  for (int i = 0; i < cat.n; ++i) {
    u[i] = p.alpha * cat.quality[i] - p.beta * cat.price[i] +
           bias_term(i, rank, endorsed, sponsored, decoy_target, sellers[i].m, p);
  }
  return u;
}

inline std::vector<double> choice_distribution(const std::vector<double>& utility,
                                               double temperature) {
  if (temperature <= 0.0) throw std::invalid_argument("temperature must be positive");
  double umax = utility[0];
  for (double u : utility) {
    if (!std::isfinite(u)) throw std::invalid_argument("non-finite utility");
    umax = std::max(umax, u);
  }
  std::vector<double> prob(utility.size());
  double z = 0.0;
  for (std::size_t i = 0; i < utility.size(); ++i) {
    prob[i] = std::exp((utility[i] - umax) / temperature);
    z += prob[i];
  }
  for (double& p : prob) p /= z;
  return prob;
}

inline int sample_winner(const std::vector<double>& prob, Rng& rng) {
  double total = 0.0;
  for (double p : prob) total += p;
  if (total <= 0.0) throw std::invalid_argument("degenerate choice distribution");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    acc += prob[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(prob.size()) - 1;
}

inline int apply_override(int winner, const Catalog& cat, double override_p, Rng& rng) {
  if (override_p <= 0.0) return winner;
  if (rng.uniform() < override_p) {
    int best = 0;
    for (int i = 1; i < cat.n; ++i)
      if (cat.quality[i] > cat.quality[best]) best = i;
    return best;
  }
  return winner;
}

struct RoundPayoffs {
  double cs = 0.0;
  double platform = 0.0;
  std::vector<double> sellers;
};

inline RoundPayoffs round_payoffs(const Catalog& cat, const std::vector<int>& bids, int winner,
                                  const PayoffParams& pp) {
  RoundPayoffs out;
  out.sellers.assign(cat.n, 0.0);
  const double p_w = cat.price[winner];
  out.cs = cat.quality[winner] - p_w;
  out.platform = bids[winner] * pp.phi_w * pp.kappa + pp.take_rate * p_w;
  for (int i = 0; i < cat.n; ++i) {
    if (i == winner)
      out.sellers[i] = (p_w - cat.cost[i]) * (1.0 - pp.take_rate) - bids[i] * pp.phi_w;
    else
      out.sellers[i] = -bids[i] * pp.phi_l;
  }
  return out;
}

}  // namespace collusim
