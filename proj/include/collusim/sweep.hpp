#pragma once

// Named robustness sweeps: each axis maps a list of value strings onto
// configurations, runs the conditions that axis needs, and emits one summary
// row per configuration. Axis and value vocabulary is shared with the CLI.

#include <cstdio>
#include <string>
#include <vector>

#include "analysis.hpp"

namespace collusim {

struct SweepRow {
  std::string axis;
  std::string value;
  int trials = 0;
  // quadruple statistics (NaN where the axis does not produce them)
  double joint_effect_pct = std::nan("");
  double comp_pp = std::nan("");
  double comp_sd = std::nan("");
  double cohens_d = std::nan("");
  double p_value = std::nan("");
  double positive_rate = std::nan("");
  // gatekeeper statistics
  double seller_effect_pct = std::nan("");
  double harm_rate = std::nan("");
  double cs_baseline = std::nan("");
  double cs_joint = std::nan("");
};

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes = {
      "factorial",     "bias-scale",         "override",       "population",
      "take-rate",     "naive-seller",       "gatekeeper-w",   "position-magnitude",
      "quality-weight", "equal-weights",     "noise-cv",       "algorithm",
      "state-space",   "long-run",           "functional-form", "ai-mode",
      "market-size",   "learning-params",    "debias-level"};
  return axes;
}

inline std::vector<std::string> sweep_default_values(const std::string& axis) {
  if (axis == "factorial") {
    std::vector<std::string> v;
    for (int m = 0; m < 16; ++m) v.push_back(std::to_string(m));
    return v;
  }
  if (axis == "bias-scale") return {"0.5", "0.75", "1.0", "1.25", "1.5", "2.0"};
  if (axis == "override") return {"0", "0.1", "0.2", "0.3", "0.4", "0.5"};
  if (axis == "population") return {"0", "0.25", "0.5", "0.75", "1.0"};
  if (axis == "take-rate") return {"0", "0.05", "0.1", "0.15", "0.2"};
  if (axis == "naive-seller")
    return {"learning", "bid1-manip0", "bid2-manip0", "bid1-manip1", "bid1-manip2"};
  if (axis == "gatekeeper-w") return {"0", "0.33", "0.5", "0.67", "1.0"};
  if (axis == "position-magnitude") return {"0.30", "0.45", "0.60", "0.75", "0.90"};
  if (axis == "quality-weight") return {"0.10", "0.15", "0.25", "0.40", "0.60"};
  if (axis == "equal-weights")
    return {"baseline", "equal-moderate", "equal-strong", "position-reduced", "quality-boosted"};
  if (axis == "noise-cv") return {"0", "0.1", "0.2", "0.3", "0.5"};
  if (axis == "algorithm")
    return {"qlearning", "sarsa",        "gradient_bandit", "ucb",
            "thompson",  "actor_critic", "reinforce",       "exp3"};
  if (axis == "state-space") return {"4", "16", "64"};
  if (axis == "long-run") return {"100000"};
  if (axis == "functional-form") return {"multiplicative", "additive"};
  if (axis == "ai-mode") return {"biased", "debiased", "true-random"};
  if (axis == "market-size") return {"4", "6", "10", "18", "36"};
  if (axis == "learning-params") {
    std::vector<std::string> v;
    for (const char* a : {"0.08", "0.12", "0.18"})
      for (const char* g : {"0.85", "0.90", "0.95"}) v.push_back(std::string(a) + ":" + g);
    return v;
  }
  if (axis == "debias-level") return {"0", "0.25", "0.5", "0.75", "0.9", "0.95"};
  throw std::invalid_argument("unknown sweep axis: " + axis);
}

inline Algorithm algorithm_from_name(const std::string& name) {
  if (name == "qlearning") return Algorithm::qlearning;
  if (name == "sarsa") return Algorithm::sarsa;
  if (name == "gradient_bandit") return Algorithm::gradient_bandit;
  if (name == "ucb") return Algorithm::ucb;
  if (name == "thompson") return Algorithm::thompson;
  if (name == "actor_critic") return Algorithm::actor_critic;
  if (name == "reinforce") return Algorithm::reinforce;
  if (name == "exp3") return Algorithm::exp3;
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace detail {

inline double parse_num(const std::string& axis, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (...) {
    throw std::invalid_argument("axis " + axis + ": bad numeric value '" + v + "'");
  }
}

inline void fill_quadruple_stats(SweepRow& row, const ConditionSuite& suite) {
  row.cs_baseline = mean_of(cs_of(suite.baseline));
  row.cs_joint = mean_of(cs_of(suite.joint));
  row.joint_effect_pct = relative_harm(row.cs_joint, row.cs_baseline);
  const ComplementarityStats c = complementarity_stats(suite);
  row.comp_pp = c.mean_pp;
  row.comp_sd = c.sd_pp;
  row.cohens_d = c.cohens_d;
  row.p_value = c.p;
  row.positive_rate = c.positive_rate;
}

// quadruple with explicit seller-side conditions (naive-seller axis)
inline ConditionSuite run_suite_with(const TrialConfig& cfg, int trials, int threads,
                                     const Condition& seller_cond, const Condition& joint_cond) {
  ConditionSuite s;
  s.baseline.resize(trials);
  s.platform_only.resize(trials);
  s.seller_only.resize(trials);
  s.joint.resize(trials);
  parallel_for(4l * trials, threads, [&](long task) {
    const int c = static_cast<int>(task / trials);
    const int t = static_cast<int>(task % trials);
    switch (c) {
      case 0: s.baseline[t] = run_trial(cfg, Condition::of(ConditionKind::baseline), t); break;
      case 1:
        s.platform_only[t] = run_trial(cfg, Condition::of(ConditionKind::platform_only), t);
        break;
      case 2: s.seller_only[t] = run_trial(cfg, seller_cond, t); break;
      default: s.joint[t] = run_trial(cfg, joint_cond, t); break;
    }
  });
  return s;
}

}  // namespace detail

// One configuration of one axis; `base` supplies everything the axis does not
// touch. Throws on unknown axis/value so sweep specs fail loudly, not quietly.
inline SweepRow run_sweep_point(const std::string& axis, const std::string& value,
                                const TrialConfig& base, int trials, int threads = 1) {
  SweepRow row;
  row.axis = axis;
  row.value = value;
  row.trials = trials;
  TrialConfig cfg = base;

  if (axis == "gatekeeper-w") {
    const double w = detail::parse_num(axis, value);
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("gatekeeper-w must be in [0,1]");
    std::vector<TrialResult> base_trials(trials), seller_trials(trials);
    Condition sc = Condition::of(ConditionKind::seller_only);
    sc.fixed_platform.w = w;
    parallel_for(2l * trials, threads, [&](long task) {
      const int t = static_cast<int>(task % trials);
      if (task < trials)
        base_trials[t] = run_trial(cfg, Condition::of(ConditionKind::baseline), t);
      else
        seller_trials[t] = run_trial(cfg, sc, t);
    });
    row.cs_baseline = mean_of(cs_of(base_trials));
    const std::vector<double> cs = cs_of(seller_trials);
    row.seller_effect_pct = relative_harm(mean_of(cs), row.cs_baseline);
    long harmed = 0;
    for (int t = 0; t < trials; ++t)
      if (cs[t] < base_trials[t].cs_mean) ++harmed;
    row.harm_rate = static_cast<double>(harmed) / trials;
    return row;
  }

  if (axis == "naive-seller") {
    if (value == "learning") {
      detail::fill_quadruple_stats(row, run_condition_suite(cfg, trials, threads));
      return row;
    }
    int b = -1, m = -1;
    if (std::sscanf(value.c_str(), "bid%d-manip%d", &b, &m) != 2 || b < 0 || b > 2 || m < 0 ||
        m > 3)
      throw std::invalid_argument("naive-seller value must be 'learning' or 'bidB-manipM'");
    Condition sc = Condition::of(ConditionKind::seller_only);
    sc.n_naive_sellers = cfg.n_sellers;
    sc.naive_decision = SellerDecision{m, b};
    Condition jc = Condition::of(ConditionKind::joint);
    jc.n_naive_sellers = cfg.n_sellers;
    jc.naive_decision = SellerDecision{m, b};
    detail::fill_quadruple_stats(row, detail::run_suite_with(cfg, trials, threads, sc, jc));
    return row;
  }

  // all remaining axes run the standard quadruple on a modified config
  if (axis == "factorial") {
    const int mask = static_cast<int>(detail::parse_num(axis, value));
    if (mask < 0 || mask > 15) throw std::invalid_argument("factorial mask must be 0..15");
    cfg.channels.position = mask & 1;
    cfg.channels.endorsement = mask & 2;
    cfg.channels.manipulation = mask & 4;
    cfg.channels.decoy = mask & 8;
  } else if (axis == "bias-scale") {
    cfg.bias_scale = detail::parse_num(axis, value);
  } else if (axis == "override") {
    cfg.override_p = detail::parse_num(axis, value);
  } else if (axis == "population") {
    const double f = detail::parse_num(axis, value);  // low-bias fraction
    if (f < 0.0 || f > 1.0) throw std::invalid_argument("population fraction must be in [0,1]");
    cfg.population.clear();
    if (f > 0.0 && f < 1.0)
      cfg.population = {{1.0 - f, 1.0}, {f, 0.5}};
    else if (f == 1.0)
      cfg.population = {{1.0, 0.5}};
  } else if (axis == "take-rate") {
    cfg.payoff.take_rate = detail::parse_num(axis, value);
  } else if (axis == "position-magnitude") {
    // row bonus is the handle; primacy and recency scale proportionally
    const double row_bonus = detail::parse_num(axis, value);
    const double k = row_bonus / 0.90;
    cfg.bias.beta_pos = row_bonus;
    cfg.bias.beta_prime = 0.40 * k;
    cfg.bias.beta_rec = 0.15 * k;
  } else if (axis == "quality-weight") {
    // equivalent reformulation: scale every bias by alpha_base/alpha_new
    const double alpha_new = detail::parse_num(axis, value);
    if (alpha_new <= 0.0) throw std::invalid_argument("quality-weight must be positive");
    cfg.bias_scale *= cfg.bias.alpha / alpha_new;
  } else if (axis == "equal-weights") {
    if (value == "baseline") {
    } else if (value == "equal-moderate" || value == "equal-strong") {
      const double b = value == "equal-moderate" ? 0.30 : 0.50;
      cfg.bias.beta_prime = cfg.bias.beta_pos = cfg.bias.beta_rec = b;
      cfg.bias.beta_end = cfg.bias.beta_manip = cfg.bias.beta_dec = b;
      cfg.bias.beta_spon = -b;
    } else if (value == "position-reduced") {
      cfg.bias.beta_prime = 0.30;
      cfg.bias.beta_pos = 0.60;
      cfg.bias.beta_rec = 0.10;
    } else if (value == "quality-boosted") {
      cfg.bias_scale /= 3.0;  // quality weight tripled, expressed as bias scaling
    } else {
      throw std::invalid_argument("unknown equal-weights configuration: " + value);
    }
  } else if (axis == "noise-cv") {
    cfg.bias_noise_cv = detail::parse_num(axis, value);
  } else if (axis == "algorithm") {
    cfg.learner.algorithm = algorithm_from_name(value);
  } else if (axis == "state-space") {
    const int n = static_cast<int>(detail::parse_num(axis, value));
    if (n != 4 && n != 16 && n != 64)
      throw std::invalid_argument("state-space must be 4, 16 or 64");
    const int per_axis = n == 4 ? 2 : n == 16 ? 4 : 8;
    cfg.codec = StateCodec::with_bins(per_axis);
  } else if (axis == "long-run") {
    cfg.rounds = static_cast<long>(detail::parse_num(axis, value));
    if (cfg.rounds <= 0) throw std::invalid_argument("long-run rounds must be positive");
  } else if (axis == "functional-form") {
    if (value == "multiplicative")
      cfg.bias.manipulation_form = ManipForm::multiplicative;
    else if (value == "additive")
      cfg.bias.manipulation_form = ManipForm::additive;
    else
      throw std::invalid_argument("functional-form must be multiplicative or additive");
  } else if (axis == "ai-mode") {
    if (value == "biased")
      cfg.ai_mode = AiMode::biased;
    else if (value == "debiased")
      cfg.ai_mode = AiMode::debiased;
    else if (value == "true-random")
      cfg.ai_mode = AiMode::true_random;
    else
      throw std::invalid_argument("ai-mode must be biased, debiased or true-random");
  } else if (axis == "market-size") {
    cfg.n_sellers = static_cast<int>(detail::parse_num(axis, value));
  } else if (axis == "learning-params") {
    double a = 0.0, g = 0.0;
    if (std::sscanf(value.c_str(), "%lf:%lf", &a, &g) != 2 || a <= 0.0 || g < 0.0 || g >= 1.0)
      throw std::invalid_argument("learning-params value must be 'alpha:gamma'");
    cfg.learner.alpha = a;
    cfg.learner.gamma = g;
  } else if (axis == "debias-level") {
    const double level = detail::parse_num(axis, value);
    if (level < 0.0 || level > 1.0) throw std::invalid_argument("debias-level must be in [0,1]");
    cfg.bias_scale *= 1.0 - level;
  } else {
    std::string msg = "unknown sweep axis: " + axis + " (valid:";
    for (const auto& a : sweep_axes()) msg += " " + a;
    throw std::invalid_argument(msg + ")");
  }

  detail::fill_quadruple_stats(row, run_condition_suite(cfg, trials, threads));
  return row;
}

inline std::vector<SweepRow> run_sweep(const std::string& axis,
                                       const std::vector<std::string>& values,
                                       const TrialConfig& base, int trials, int threads = 1) {
  const std::vector<std::string> vals = values.empty() ? sweep_default_values(axis) : values;
  std::vector<SweepRow> rows;
  rows.reserve(vals.size());
  for (const auto& v : vals) rows.push_back(run_sweep_point(axis, v, base, trials, threads));
  return rows;
}

}  // namespace collusim
