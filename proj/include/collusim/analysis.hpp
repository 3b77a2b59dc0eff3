#pragma once

// Welfare metrics, paired complementarity, effect sizes and significance
// tests over collections of trial results. The t distribution CDF is computed
// from the regularized incomplete beta function (continued fraction), so no
// table lookups and no external stats dependency.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "experiment.hpp"

namespace collusim {

inline double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sd_of(const std::vector<double>& xs) {
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

inline double relative_harm(double cs_condition_mean, double cs_baseline_mean) {
  if (cs_baseline_mean <= 0.0) throw std::domain_error("baseline CS must be positive");
  return (cs_baseline_mean - cs_condition_mean) / cs_baseline_mean * 100.0;
}

inline std::vector<double> cs_of(const std::vector<TrialResult>& trials) {
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.cs_mean);
  return out;
}

// per-trial Comp_t, normalized by the same trial's baseline CS
inline std::vector<double> complementarity_paired(const std::vector<double>& cs_p,
                                                  const std::vector<double>& cs_s,
                                                  const std::vector<double>& cs_0,
                                                  const std::vector<double>& cs_ps) {
  const std::size_t n = cs_0.size();
  if (cs_p.size() != n || cs_s.size() != n || cs_ps.size() != n)
    throw std::invalid_argument("complementarity requires matched trial counts");
  std::vector<double> comp(n);
  for (std::size_t t = 0; t < n; ++t)
    comp[t] = (cs_p[t] + cs_s[t] - cs_0[t] - cs_ps[t]) / cs_0[t] * 100.0;
  return comp;
}

inline std::vector<double> complementarity_paired(const ConditionSuite& suite) {
  return complementarity_paired(cs_of(suite.platform_only), cs_of(suite.seller_only),
                                cs_of(suite.baseline), cs_of(suite.joint));
}

inline double cohens_d(const std::vector<double>& samples) {
  if (samples.size() < 2) throw std::invalid_argument("need n >= 2");
  const double s = sd_of(samples);
  if (s == 0.0) throw std::domain_error("zero variance sample");
  return mean_of(samples) / s;
}

namespace detail {

// regularized incomplete beta I_x(a,b) by Lentz's continued fraction
inline double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-14) break;
  }
  return h;
}

inline double inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnbeta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  const double front = std::exp(a * std::log(x) + b * std::log(1.0 - x) - lnbeta);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// P(T <= t) for Student's t with df degrees of freedom
inline double student_t_cdf(double t, double df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * detail::inc_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? 1.0 - p : p;
}

// two-sided critical value by bisection on the CDF
inline double student_t_crit(double level_two_sided, double df) {
  const double target = 1.0 - (1.0 - level_two_sided) / 2.0;
  double lo = 0.0, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

inline TTestResult t_test_and_ci(const std::vector<double>& samples, double level = 0.95) {
  if (samples.size() < 2) throw std::invalid_argument("need n >= 2");
  const double m = mean_of(samples);
  const double s = sd_of(samples);
  if (s == 0.0) throw std::domain_error("zero variance sample");
  const double n = static_cast<double>(samples.size());
  const double se = s / std::sqrt(n);
  TTestResult r;
  r.t = m / se;
  const double df = n - 1.0;
  r.p = 2.0 * (1.0 - student_t_cdf(std::abs(r.t), df));
  const double tc = student_t_crit(level, df);
  r.ci_lo = m - tc * se;
  r.ci_hi = m + tc * se;
  return r;
}

struct WelfareDecomposition {
  double cs = 0.0;
  double platform = 0.0;
  double sellers = 0.0;
  double total = 0.0;
};

inline WelfareDecomposition welfare_decomposition(const std::vector<TrialResult>& trials) {
  WelfareDecomposition w;
  for (const auto& t : trials) {
    w.cs += t.cs_mean;
    w.platform += t.platform_profit_mean;
    w.sellers += t.seller_profit_mean;
  }
  const double n = static_cast<double>(trials.size());
  w.cs /= n;
  w.platform /= n;
  w.sellers /= n;
  w.total = w.cs + w.platform + w.sellers;
  return w;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw std::invalid_argument("need matched n >= 3");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::domain_error("degenerate correlation input");
  return sxy / std::sqrt(sxx * syy);
}

inline double quality_win_correlation(const std::vector<double>& win_rates,
                                      const std::vector<double>& qualities) {
  return pearson(win_rates, qualities);
}

// mean quality-win correlation across trials of one condition
inline double quality_win_correlation(const std::vector<TrialResult>& trials,
                                      const Catalog& cat) {
  double acc = 0.0;
  for (const auto& t : trials) acc += pearson(t.win_rate, cat.quality);
  return acc / static_cast<double>(trials.size());
}

inline double q_stability(const std::vector<std::vector<double>>& snapshots) {
  if (snapshots.size() < 2) throw std::invalid_argument("need >= 2 snapshots");
  double acc = 0.0;
  for (std::size_t k = 1; k < snapshots.size(); ++k)
    acc += detail::mean_abs_diff(snapshots[k], snapshots[k - 1]);
  return acc / static_cast<double>(snapshots.size() - 1);
}

struct ConditionStats {
  double cs_mean = 0.0;
  double cs_sd = 0.0;
  double harm_pct = 0.0;       // vs matched baseline, percent of baseline CS
  double harm_rate = 0.0;      // fraction of trials with CS strictly below baseline
  WelfareDecomposition welfare;
};

inline ConditionStats condition_stats(const std::vector<TrialResult>& cond,
                                      const std::vector<TrialResult>& baseline) {
  const std::vector<double> cs = cs_of(cond);
  const std::vector<double> cs0 = cs_of(baseline);
  ConditionStats st;
  st.cs_mean = mean_of(cs);
  st.cs_sd = cs.size() > 1 ? sd_of(cs) : 0.0;
  st.harm_pct = relative_harm(st.cs_mean, mean_of(cs0));
  long below = 0;
  for (std::size_t t = 0; t < cs.size() && t < cs0.size(); ++t)
    if (cs[t] < cs0[t]) ++below;
  st.harm_rate = cs.empty() ? 0.0 : static_cast<double>(below) / cs.size();
  st.welfare = welfare_decomposition(cond);
  return st;
}

struct ComplementarityStats {
  double mean_pp = 0.0;
  double sd_pp = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double cohens_d = 0.0;
  double t = 0.0;
  double p = 1.0;
  double positive_rate = 0.0;
};

inline ComplementarityStats complementarity_stats(const ConditionSuite& suite) {
  const std::vector<double> comp = complementarity_paired(suite);
  ComplementarityStats st;
  st.mean_pp = mean_of(comp);
  st.sd_pp = sd_of(comp);
  st.cohens_d = collusim::cohens_d(comp);
  const TTestResult tt = t_test_and_ci(comp);
  st.t = tt.t;
  st.p = tt.p;
  st.ci_lo = tt.ci_lo;
  st.ci_hi = tt.ci_hi;
  long pos = 0;
  for (double c : comp)
    if (c > 0.0) ++pos;
  st.positive_rate = static_cast<double>(pos) / comp.size();
  return st;
}

struct FactorialRow {
  int mask = 0;  // bit 0 position, 1 endorsement, 2 manipulation, 3 decoy
  double joint_effect_pct = 0.0;
  double comp_pp = 0.0;
  double cohens_d = 0.0;
};

inline std::vector<FactorialRow> factorial_table(
    const std::vector<std::pair<int, ConditionSuite>>& suites) {
  if (suites.size() != 16) throw std::invalid_argument("factorial needs all 16 masks");
  std::vector<FactorialRow> rows;
  for (const auto& [mask, suite] : suites) {
    FactorialRow r;
    r.mask = mask;
    r.joint_effect_pct =
        relative_harm(mean_of(cs_of(suite.joint)), mean_of(cs_of(suite.baseline)));
    const std::vector<double> comp = complementarity_paired(suite);
    r.comp_pp = mean_of(comp);
    r.cohens_d = sd_of(comp) > 0.0 ? mean_of(comp) / sd_of(comp) : 0.0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace collusim
