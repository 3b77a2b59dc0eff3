// collusim: batch front end over the simulation library.
//
//   collusim run        --config cfg.json --out dir [--condition all] ...
//   collusim factorial  --out dir ...
//   collusim sweep AXIS [VALUES...] --out dir ...
//   collusim report trials.csv [more.csv...] [--summary summary.json]
//
// Outputs are trials.csv (per-trial rows), summary.json (condition stats plus
// the complementarity block) and manifest.json (resolved configuration).
// Identical invocations produce byte-identical trials.csv/summary.json for
// any --threads value.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "collusim/analysis.hpp"
#include "collusim/sweep.hpp"

using nlohmann::json;
using namespace collusim;

namespace {

constexpr const char* kVersion = "collusim 1.0.0";

// all floats leave the tool with 12 significant digits, CSV and JSON alike
double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("COLLUSIM_THREADS")) {
    const int k = std::atoi(env);
    if (k > 0) return k;
  }
  return 1;
}

// ---- config loading ----------------------------------------------------

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw std::runtime_error("unknown config key '" + key + "' in " + where);
  }
}

template <typename T>
void maybe(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

void load_bias(const json& j, BiasParams& b) {
  require_keys(j,
               {"alpha", "beta", "beta_prime", "beta_pos", "beta_rec", "beta_end", "beta_spon",
                "beta_manip", "eta", "beta_dec", "temperature", "manipulation_form"},
               "bias");
  maybe(j, "alpha", b.alpha);
  maybe(j, "beta", b.beta);
  maybe(j, "beta_prime", b.beta_prime);
  maybe(j, "beta_pos", b.beta_pos);
  maybe(j, "beta_rec", b.beta_rec);
  maybe(j, "beta_end", b.beta_end);
  maybe(j, "beta_spon", b.beta_spon);
  maybe(j, "beta_manip", b.beta_manip);
  maybe(j, "eta", b.eta);
  maybe(j, "beta_dec", b.beta_dec);
  maybe(j, "temperature", b.temperature);
  if (j.contains("manipulation_form")) {
    const std::string f = j.at("manipulation_form").get<std::string>();
    if (f == "multiplicative")
      b.manipulation_form = ManipForm::multiplicative;
    else if (f == "additive")
      b.manipulation_form = ManipForm::additive;
    else
      throw std::runtime_error("manipulation_form must be multiplicative or additive");
  }
}

TrialConfig load_config(const json& j) {
  TrialConfig cfg;
  require_keys(j,
               {"n_sellers", "rounds", "measure_fraction", "seed_base", "bias", "channels",
                "bias_scale", "bias_noise_cv", "payoff", "override_p", "population", "codec",
                "learner", "ai_mode", "checkpoints"},
               "config root");
  maybe(j, "n_sellers", cfg.n_sellers);
  maybe(j, "rounds", cfg.rounds);
  maybe(j, "measure_fraction", cfg.measure_fraction);
  maybe(j, "seed_base", cfg.seed_base);
  if (j.contains("bias")) load_bias(j.at("bias"), cfg.bias);
  if (j.contains("channels")) {
    const json& c = j.at("channels");
    require_keys(c, {"position", "endorsement", "manipulation", "decoy"}, "channels");
    maybe(c, "position", cfg.channels.position);
    maybe(c, "endorsement", cfg.channels.endorsement);
    maybe(c, "manipulation", cfg.channels.manipulation);
    maybe(c, "decoy", cfg.channels.decoy);
  }
  maybe(j, "bias_scale", cfg.bias_scale);
  maybe(j, "bias_noise_cv", cfg.bias_noise_cv);
  if (j.contains("payoff")) {
    const json& p = j.at("payoff");
    require_keys(p, {"kappa", "phi_w", "phi_l", "take_rate"}, "payoff");
    maybe(p, "kappa", cfg.payoff.kappa);
    maybe(p, "phi_w", cfg.payoff.phi_w);
    maybe(p, "phi_l", cfg.payoff.phi_l);
    maybe(p, "take_rate", cfg.payoff.take_rate);
  }
  maybe(j, "override_p", cfg.override_p);
  if (j.contains("population")) {
    cfg.population.clear();
    for (const json& pc : j.at("population")) {
      require_keys(pc, {"fraction", "bias_multiplier"}, "population entry");
      PopulationClass c;
      maybe(pc, "fraction", c.fraction);
      maybe(pc, "bias_multiplier", c.bias_multiplier);
      cfg.population.push_back(c);
    }
  }
  if (j.contains("codec")) {
    const json& c = j.at("codec");
    require_keys(c, {"manip_bins", "bid_bins", "history_window"}, "codec");
    maybe(c, "manip_bins", cfg.codec.manip_bins);
    maybe(c, "bid_bins", cfg.codec.bid_bins);
    maybe(c, "history_window", cfg.codec.history_window);
  }
  if (j.contains("learner")) {
    const json& l = j.at("learner");
    require_keys(l,
                 {"algorithm", "alpha", "gamma", "eps0", "eps_decay", "eps_min", "ucb_c",
                  "ac_alpha_v", "ac_alpha_theta", "ac_tau", "reinforce_alpha",
                  "reinforce_episode", "exp3_gamma", "q_init_range"},
                 "learner");
    if (l.contains("algorithm"))
      cfg.learner.algorithm = algorithm_from_name(l.at("algorithm").get<std::string>());
    maybe(l, "alpha", cfg.learner.alpha);
    maybe(l, "gamma", cfg.learner.gamma);
    maybe(l, "eps0", cfg.learner.eps0);
    maybe(l, "eps_decay", cfg.learner.eps_decay);
    maybe(l, "eps_min", cfg.learner.eps_min);
    maybe(l, "ucb_c", cfg.learner.ucb_c);
    maybe(l, "ac_alpha_v", cfg.learner.ac_alpha_v);
    maybe(l, "ac_alpha_theta", cfg.learner.ac_alpha_theta);
    maybe(l, "ac_tau", cfg.learner.ac_tau);
    maybe(l, "reinforce_alpha", cfg.learner.reinforce_alpha);
    maybe(l, "reinforce_episode", cfg.learner.reinforce_episode);
    maybe(l, "exp3_gamma", cfg.learner.exp3_gamma);
    maybe(l, "q_init_range", cfg.learner.q_init_range);
  }
  if (j.contains("ai_mode")) {
    const std::string m = j.at("ai_mode").get<std::string>();
    if (m == "biased")
      cfg.ai_mode = AiMode::biased;
    else if (m == "debiased")
      cfg.ai_mode = AiMode::debiased;
    else if (m == "true_random" || m == "true-random")
      cfg.ai_mode = AiMode::true_random;
    else
      throw std::runtime_error("ai_mode must be biased, debiased or true_random");
  }
  if (j.contains("checkpoints")) cfg.checkpoints = j.at("checkpoints").get<std::vector<long>>();
  cfg.validate();
  return cfg;
}

json config_to_json(const TrialConfig& cfg) {
  json j;
  j["n_sellers"] = cfg.n_sellers;
  j["rounds"] = cfg.rounds;
  j["measure_fraction"] = sig12(cfg.measure_fraction);
  j["seed_base"] = cfg.seed_base;
  j["bias"] = {{"alpha", sig12(cfg.bias.alpha)},
               {"beta", sig12(cfg.bias.beta)},
               {"beta_prime", sig12(cfg.bias.beta_prime)},
               {"beta_pos", sig12(cfg.bias.beta_pos)},
               {"beta_rec", sig12(cfg.bias.beta_rec)},
               {"beta_end", sig12(cfg.bias.beta_end)},
               {"beta_spon", sig12(cfg.bias.beta_spon)},
               {"beta_manip", sig12(cfg.bias.beta_manip)},
               {"eta", sig12(cfg.bias.eta)},
               {"beta_dec", sig12(cfg.bias.beta_dec)},
               {"temperature", sig12(cfg.bias.temperature)},
               {"manipulation_form", cfg.bias.manipulation_form == ManipForm::multiplicative
                                         ? "multiplicative"
                                         : "additive"}};
  j["channels"] = {{"position", cfg.channels.position},
                   {"endorsement", cfg.channels.endorsement},
                   {"manipulation", cfg.channels.manipulation},
                   {"decoy", cfg.channels.decoy}};
  j["bias_scale"] = sig12(cfg.bias_scale);
  j["bias_noise_cv"] = sig12(cfg.bias_noise_cv);
  j["payoff"] = {{"kappa", sig12(cfg.payoff.kappa)},
                 {"phi_w", sig12(cfg.payoff.phi_w)},
                 {"phi_l", sig12(cfg.payoff.phi_l)},
                 {"take_rate", sig12(cfg.payoff.take_rate)}};
  j["override_p"] = sig12(cfg.override_p);
  j["population"] = json::array();
  for (const auto& pc : cfg.population)
    j["population"].push_back(
        {{"fraction", sig12(pc.fraction)}, {"bias_multiplier", sig12(pc.bias_multiplier)}});
  j["codec"] = {{"manip_bins", cfg.codec.manip_bins},
                {"bid_bins", cfg.codec.bid_bins},
                {"history_window", cfg.codec.history_window}};
  const char* algo_names[] = {"qlearning", "sarsa",        "gradient_bandit", "ucb",
                              "thompson",  "actor_critic", "reinforce",       "exp3"};
  j["learner"] = {{"algorithm", algo_names[static_cast<int>(cfg.learner.algorithm)]},
                  {"alpha", sig12(cfg.learner.alpha)},
                  {"gamma", sig12(cfg.learner.gamma)},
                  {"eps0", sig12(cfg.learner.eps0)},
                  {"eps_decay", sig12(cfg.learner.eps_decay)},
                  {"eps_min", sig12(cfg.learner.eps_min)}};
  j["ai_mode"] = cfg.ai_mode == AiMode::biased     ? "biased"
                 : cfg.ai_mode == AiMode::debiased ? "debiased"
                                                   : "true_random";
  j["checkpoints"] = cfg.checkpoints;
  return j;
}

// ---- output plumbing ---------------------------------------------------

// tracks files created by one command; anything still registered when an
// error escapes is deleted so failures never leave partial outputs behind
struct OutputSet {
  std::vector<std::filesystem::path> files;
  bool committed = false;

  std::ofstream open(const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);  // binary: LF line endings everywhere
    if (!f) throw std::runtime_error("cannot open output file " + p.string());
    files.push_back(p);
    return f;
  }
  ~OutputSet() {
    if (committed) return;
    for (const auto& p : files) {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  }
};

void write_manifest(OutputSet& out, const std::filesystem::path& dir, const json& command,
                    const TrialConfig& cfg, int trials, int threads, double wall_seconds,
                    const std::vector<std::string>& produced) {
  json m;
  m["tool_version"] = kVersion;
  m["command"] = command;
  m["config"] = config_to_json(cfg);
  m["seed_base"] = cfg.seed_base;
  m["trials"] = trials;
  m["threads"] = threads;
  m["wall_clock_seconds"] = sig12(wall_seconds);
  m["outputs"] = produced;
  auto f = out.open(dir / "manifest.json");
  f << m.dump(2) << "\n";
}

const char* condition_name(ConditionKind k) {
  switch (k) {
    case ConditionKind::baseline: return "baseline";
    case ConditionKind::platform_only: return "platform_only";
    case ConditionKind::seller_only: return "seller_only";
    default: return "joint";
  }
}

void write_trials_csv(std::ofstream& f, int n_sellers,
                      const std::vector<std::pair<ConditionKind, const std::vector<TrialResult>*>>&
                          conditions) {
  f << "trial,condition,cs_mean,platform_profit_mean,seller_profit_mean,w_mean,m_mean,b_mean";
  for (int i = 1; i <= n_sellers; ++i) f << ",win_rate_" << i;
  f << "\n";
  for (const auto& [kind, trials] : conditions) {
    for (std::size_t t = 0; t < trials->size(); ++t) {
      const TrialResult& r = (*trials)[t];
      f << t << "," << condition_name(kind) << "," << fmt12(r.cs_mean) << ","
        << fmt12(r.platform_profit_mean) << "," << fmt12(r.seller_profit_mean) << ","
        << fmt12(r.w_mean) << "," << fmt12(r.m_mean) << "," << fmt12(r.b_mean);
      for (double wr : r.win_rate) f << "," << fmt12(wr);
      f << "\n";
    }
  }
}

json condition_stats_json(const std::vector<TrialResult>& cond,
                          const std::vector<TrialResult>& baseline) {
  json j;
  const std::vector<double> cs = cs_of(cond);
  j["cs_mean"] = sig12(mean_of(cs));
  j["cs_sd"] = cs.size() > 1 ? json(sig12(sd_of(cs))) : json(nullptr);
  if (!baseline.empty()) {
    const ConditionStats st = condition_stats(cond, baseline);
    j["harm_pct"] = sig12(st.harm_pct);
    j["harm_rate"] = sig12(st.harm_rate);
  } else {
    j["harm_pct"] = nullptr;
    j["harm_rate"] = nullptr;
  }
  const WelfareDecomposition w = welfare_decomposition(cond);
  j["welfare"] = {{"cs", sig12(w.cs)},
                  {"platform", sig12(w.platform)},
                  {"sellers", sig12(w.sellers)},
                  {"total", sig12(w.total)}};
  return j;
}

json summary_json(const ConditionSuite& suite) {
  json j;
  j["conditions"] = json::object();
  const std::pair<const char*, const std::vector<TrialResult>*> conds[4] = {
      {"baseline", &suite.baseline},
      {"platform_only", &suite.platform_only},
      {"seller_only", &suite.seller_only},
      {"joint", &suite.joint}};
  for (const auto& [name, trials] : conds) {
    if (trials->empty()) continue;
    j["conditions"][name] = condition_stats_json(*trials, suite.baseline);
  }
  const bool full = !suite.baseline.empty() && !suite.platform_only.empty() &&
                    !suite.seller_only.empty() && !suite.joint.empty();
  if (full && suite.baseline.size() > 1) {
    const ComplementarityStats c = complementarity_stats(suite);
    j["complementarity"] = {{"mean_pp", sig12(c.mean_pp)},   {"sd_pp", sig12(c.sd_pp)},
                            {"ci_lo", sig12(c.ci_lo)},       {"ci_hi", sig12(c.ci_hi)},
                            {"cohens_d", sig12(c.cohens_d)}, {"t", sig12(c.t)},
                            {"p", sig12(c.p)},               {"positive_rate", sig12(c.positive_rate)}};
  } else {
    j["complementarity"] = nullptr;  // degenerate with < 2 trials or missing conditions
  }
  return j;
}

// ---- commands ----------------------------------------------------------

int cmd_run(const std::string& config_path, const std::string& condition, int trials, long rounds,
            long seed_base, int threads, const std::string& out_dir) {
  TrialConfig cfg;
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) throw std::runtime_error("cannot read config file " + config_path);
    json j;
    try {
      j = json::parse(f);
    } catch (const json::exception& e) {
      throw std::runtime_error("invalid JSON in " + config_path + ": " + e.what());
    }
    cfg = load_config(j);
  }
  if (rounds > 0) cfg.rounds = rounds;
  if (seed_base >= 0) cfg.seed_base = static_cast<std::uint64_t>(seed_base);
  cfg.validate();

  std::vector<ConditionKind> kinds;
  if (condition == "all")
    kinds = {ConditionKind::baseline, ConditionKind::platform_only, ConditionKind::seller_only,
             ConditionKind::joint};
  else if (condition == "baseline")
    kinds = {ConditionKind::baseline};
  else if (condition == "platform-only")
    kinds = {ConditionKind::platform_only};
  else if (condition == "seller-only")
    kinds = {ConditionKind::seller_only};
  else if (condition == "joint")
    kinds = {ConditionKind::joint};
  else
    throw std::runtime_error("--condition must be all, baseline, platform-only, seller-only or joint");

  const auto t0 = std::chrono::steady_clock::now();
  ConditionSuite suite;
  std::vector<std::vector<TrialResult>*> slots;
  for (ConditionKind k : kinds) {
    auto& v = suite.by_kind(k);
    v.resize(trials);
    slots.push_back(&v);
  }
  const long n_tasks = static_cast<long>(kinds.size()) * trials;
  parallel_for(n_tasks, threads, [&](long task) {
    const int c = static_cast<int>(task / trials);
    const int t = static_cast<int>(task % trials);
    (*slots[c])[t] = run_trial(cfg, Condition::of(kinds[c]), t);
  });
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  OutputSet out;
  {
    auto f = out.open(dir / "trials.csv");
    std::vector<std::pair<ConditionKind, const std::vector<TrialResult>*>> conds;
    for (std::size_t i = 0; i < kinds.size(); ++i) conds.emplace_back(kinds[i], slots[i]);
    write_trials_csv(f, cfg.n_sellers, conds);
  }
  {
    auto f = out.open(dir / "summary.json");
    f << summary_json(suite).dump(2) << "\n";
  }
  write_manifest(out, dir,
                 {{"name", "run"}, {"condition", condition}, {"config_path", config_path}}, cfg,
                 trials, threads, wall, {"trials.csv", "summary.json"});
  out.committed = true;
  std::cout << "run: " << trials << " trials x " << kinds.size() << " conditions -> " << out_dir
            << " (" << fmt12(wall) << "s)\n";
  return 0;
}

void write_sweep_csv(std::ofstream& f, const std::vector<SweepRow>& rows) {
  f << "axis,value,trials,joint_effect_pct,comp_pp,comp_sd,cohens_d,p_value,positive_rate,"
       "seller_effect_pct,harm_rate,cs_baseline,cs_joint\n";
  auto cell = [](double x) { return std::isnan(x) ? std::string() : fmt12(x); };
  for (const SweepRow& r : rows) {
    f << r.axis << "," << r.value << "," << r.trials << "," << cell(r.joint_effect_pct) << ","
      << cell(r.comp_pp) << "," << cell(r.comp_sd) << "," << cell(r.cohens_d) << ","
      << cell(r.p_value) << "," << cell(r.positive_rate) << "," << cell(r.seller_effect_pct) << ","
      << cell(r.harm_rate) << "," << cell(r.cs_baseline) << "," << cell(r.cs_joint) << "\n";
  }
}

int cmd_sweep(const std::string& axis, const std::vector<std::string>& values, int trials,
              long seed_base, int threads, const std::string& out_dir) {
  TrialConfig cfg;
  if (seed_base >= 0) cfg.seed_base = static_cast<std::uint64_t>(seed_base);
  const std::vector<std::string> vals = values.empty() ? sweep_default_values(axis) : values;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<SweepRow> rows;
  for (const auto& v : vals) {
    rows.push_back(run_sweep_point(axis, v, cfg, trials, threads));
    std::cout << axis << " " << v << ": done\n";
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  OutputSet out;
  {
    auto f = out.open(dir / "sweep.csv");
    write_sweep_csv(f, rows);
  }
  write_manifest(out, dir, {{"name", "sweep"}, {"axis", axis}, {"values", vals}}, cfg, trials,
                 threads, wall, {"sweep.csv"});
  out.committed = true;
  std::cout << "sweep " << axis << ": " << rows.size() << " rows -> " << out_dir << " ("
            << fmt12(wall) << "s)\n";
  return 0;
}

// ---- report ------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_report(const std::vector<std::string>& csv_paths, const std::string& summary_path) {
  const std::vector<std::string> fixed = {
      "trial",  "condition", "cs_mean", "platform_profit_mean", "seller_profit_mean",
      "w_mean", "m_mean",    "b_mean"};
  std::map<std::string, std::map<long, TrialResult>> by_condition;

  for (const std::string& path : csv_paths) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty CSV " + path);
    const std::vector<std::string> header = split_csv_line(line);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      if (i >= header.size() || header[i] != fixed[i])
        throw std::runtime_error("format error in " + path + ": expected column '" + fixed[i] +
                                 "' at position " + std::to_string(i + 1));
    }
    for (std::size_t i = fixed.size(); i < header.size(); ++i) {
      const std::string want = "win_rate_" + std::to_string(i - fixed.size() + 1);
      if (header[i] != want)
        throw std::runtime_error("format error in " + path + ": unexpected column '" + header[i] +
                                 "' (expected '" + want + "')");
    }
    long lineno = 1;
    while (std::getline(f, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_csv_line(line);
      if (cells.size() != header.size())
        throw std::runtime_error("format error in " + path + " line " + std::to_string(lineno) +
                                 ": expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()));
      TrialResult r;
      long trial = 0;
      try {
        trial = std::stol(cells[0]);
        r.cs_mean = std::stod(cells[2]);
        r.platform_profit_mean = std::stod(cells[3]);
        r.seller_profit_mean = std::stod(cells[4]);
        r.w_mean = std::stod(cells[5]);
        r.m_mean = std::stod(cells[6]);
        r.b_mean = std::stod(cells[7]);
        for (std::size_t i = fixed.size(); i < cells.size(); ++i)
          r.win_rate.push_back(std::stod(cells[i]));
      } catch (...) {
        throw std::runtime_error("format error in " + path + " line " + std::to_string(lineno) +
                                 ": non-numeric cell");
      }
      by_condition[cells[1]][trial] = r;
    }
  }

  ConditionSuite suite;
  for (const auto& [name, rows] : by_condition) {
    std::vector<TrialResult>* dst = nullptr;
    if (name == "baseline") dst = &suite.baseline;
    else if (name == "platform_only") dst = &suite.platform_only;
    else if (name == "seller_only") dst = &suite.seller_only;
    else if (name == "joint") dst = &suite.joint;
    else throw std::runtime_error("format error: unknown condition '" + name + "'");
    long expect = 0;
    for (const auto& [trial, r] : rows) {
      if (trial != expect++)
        throw std::runtime_error("format error: condition " + name +
                                 " has non-contiguous trial indices");
      dst->push_back(r);
    }
  }

  const json recomputed = summary_json(suite);
  std::cout << recomputed.dump(2) << "\n";

  if (!summary_path.empty()) {
    std::ifstream f(summary_path);
    if (!f) throw std::runtime_error("cannot read " + summary_path);
    const json stored = json::parse(f);
    // structural walk; every numeric leaf must agree within 1e-9
    std::function<void(const json&, const json&, const std::string&)> check =
        [&](const json& a, const json& b, const std::string& at) {
          if (a.is_number() && b.is_number()) {
            const double x = a.get<double>(), y = b.get<double>();
            if (std::abs(x - y) > 1e-9 + 1e-9 * std::max(std::abs(x), std::abs(y)))
              throw std::runtime_error("report mismatch at " + at + ": " + fmt12(x) + " vs " +
                                       fmt12(y));
            return;
          }
          if (a.type() != b.type())
            throw std::runtime_error("report mismatch at " + at + ": type differs");
          if (a.is_object()) {
            for (const auto& [k, v] : a.items()) {
              if (!b.contains(k)) throw std::runtime_error("report mismatch: missing key " + k);
              check(v, b.at(k), at + "/" + k);
            }
          } else if (a.is_array()) {
            if (a.size() != b.size())
              throw std::runtime_error("report mismatch at " + at + ": array size");
            for (std::size_t i = 0; i < a.size(); ++i) check(a[i], b[i], at + "[" + std::to_string(i) + "]");
          } else if (a != b) {
            throw std::runtime_error("report mismatch at " + at);
          }
        };
    check(stored, recomputed, "");
    std::cout << "report: verified against " << summary_path << " within 1e-9\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"collusim: marketplace simulation batch runner"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, condition = "all", out_dir = "out", axis, summary_path;
  std::vector<std::string> values, csv_paths;
  int trials = 100, threads = 0;
  long rounds = 0, seed_base = -1;

  CLI::App* run = app.add_subcommand("run", "run the four-condition suite");
  run->add_option("--config", config_path, "JSON config of TrialConfig fields");
  run->add_option("--condition", condition, "all|baseline|platform-only|seller-only|joint");
  run->add_option("--trials", trials, "trials per condition");
  run->add_option("--rounds", rounds, "rounds per trial (overrides config)");
  run->add_option("--seed-base", seed_base, "base seed (overrides config)");
  run->add_option("--threads", threads, "worker threads (default COLLUSIM_THREADS or 1)");
  run->add_option("--out", out_dir, "output directory");

  CLI::App* fact = app.add_subcommand("factorial", "all 16 channel-mask quadruples");
  fact->add_option("--trials", trials, "trials per condition");
  fact->add_option("--seed-base", seed_base, "base seed");
  fact->add_option("--threads", threads, "worker threads");
  fact->add_option("--out", out_dir, "output directory");

  CLI::App* sweep = app.add_subcommand("sweep", "one-axis robustness sweep");
  sweep->add_option("axis", axis, "sweep axis")->required();
  sweep->add_option("values", values, "axis values (default: the full panel)");
  sweep->add_option("--trials", trials, "trials per condition");
  sweep->add_option("--seed-base", seed_base, "base seed");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_option("--out", out_dir, "output directory");

  CLI::App* report = app.add_subcommand("report", "recompute statistics from trials.csv files");
  report->add_option("csv", csv_paths, "trials.csv paths")->required();
  report->add_option("--summary", summary_path, "summary.json to verify against");

  CLI11_PARSE(app, argc, argv);

  try {
    const int k = resolve_threads(threads);
    if (run->parsed()) return cmd_run(config_path, condition, trials, rounds, seed_base, k, out_dir);
    if (fact->parsed()) return cmd_sweep("factorial", {}, trials, seed_base, k, out_dir);
    if (sweep->parsed()) {
      bool known = false;
      for (const auto& a : sweep_axes())
        if (a == axis) known = true;
      if (!known) {
        std::cerr << "unknown axis '" << axis << "'. valid axes:";
        for (const auto& a : sweep_axes()) std::cerr << " " << a;
        std::cerr << "\n";
        return 2;
      }
      return cmd_sweep(axis, values, trials, seed_base, k, out_dir);
    }
    if (report->parsed()) return cmd_report(csv_paths, summary_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
