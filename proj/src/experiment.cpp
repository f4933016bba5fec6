#include "lifelong/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace lifelong {

namespace {

using json = nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

// Line of the first occurrence of "key" in the text, or 0.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void schema_error(const std::string& text, const std::string& key, const std::string& what) {
  std::size_t line = line_of_key(text, key);
  std::string where = line ? "config line " + std::to_string(line) + ": " : "config: ";
  throw UsageError(where + "\"" + key + "\": " + what);
}

void check_keys(const std::string& text, const json& obj, const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.contains(k)) schema_error(text, k, "unknown key");
}

template <class T>
void read(const std::string& text, const json& obj, const std::string& key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    schema_error(text, key, e.what());
  }
}

std::string num(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::size_t good_count(const ExperimentConfig& cfg) { return cfg.stream.m; }

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        body(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
  if (!out) throw UsageError("write failed for " + path.string());
}

}  // namespace

std::size_t ExperimentConfig::effective_c() const {
  if (c) return *c;
  return combined_cap(stream.r, stream.K, stream.N, stream.m);
}

void ExperimentConfig::validate() const {
  stream.validate();
  if (trials == 0) throw SpecError("trials must be at least 1");
  if (!(bound_constant > 0.0)) throw SpecError("bound_constant must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw SpecError("delta must lie in (0, 1)");
  if (agnostic == AgnosticMode::combined && c && *c == 0) throw SpecError("combined protocol needs c >= 1");
  if (sampled && is_tree_family(stream.family)) throw SpecError("sampled oracle applies to monomials and polynomials");
  if (naive && stream.family != Family::trees && stream.family != Family::monomials &&
      stream.family != Family::polynomials)
    throw SpecError("naive learner exists for Trees, Monomials and Polynomials");
  if (agnostic != AgnosticMode::none && stream.family == Family::overcomplete_trees)
    throw SpecError("agnostic protocols are not defined for the overcomplete model");
  if (sweep) {
    static const std::set<std::string> axes = {"m", "N", "K", "r", "c"};
    if (!axes.contains(sweep->axis)) throw SpecError("sweep axis must be one of m, N, K, r, c");
    if (sweep->values.empty()) throw SpecError("sweep values must not be empty");
    if (sweep->axis == "c" && agnostic != AgnosticMode::combined)
      throw SpecError("sweeping c needs the combined protocol");
  }
  if (adversary) {
    if (adversary->pool == 0 || adversary->S == 0 || adversary->trials == 0)
      throw SpecError("adversary pool, S and trials must be positive");
    for (std::size_t b : adversary->budgets)
      if (b > adversary->S * adversary->pool) throw SpecError("adversary budget exceeds S * pool");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("config line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                     ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw UsageError("config line 1: top level must be an object");
  check_keys(text, j,
             {"family", "N", "K", "d", "s", "t", "m", "r", "S", "seed", "trials", "strict", "placement", "agnostic",
              "metafeature_depth", "p_min", "K1", "K2", "oracle", "gain", "learner", "delta", "grid_log2",
              "bound_constant", "sweep", "adversary"});
  ExperimentConfig cfg;
  StreamSpec& s = cfg.stream;
  std::string family = "Trees";
  read(text, j, "family", family);
  try {
    s.family = family_from_string(family);
  } catch (const SpecError& e) {
    schema_error(text, "family", e.what());
  }
  read(text, j, "N", s.N);
  read(text, j, "K", s.K);
  read(text, j, "d", s.d);
  read(text, j, "s", s.s);
  read(text, j, "t", s.t);
  read(text, j, "m", s.m);
  read(text, j, "r", s.r);
  read(text, j, "S", s.S);
  read(text, j, "seed", s.seed);
  read(text, j, "metafeature_depth", s.metafeature_depth);
  read(text, j, "p_min", s.p_min);
  read(text, j, "K1", s.K1);
  read(text, j, "K2", s.K2);
  read(text, j, "grid_log2", s.grid_log2);
  read(text, j, "trials", cfg.trials);
  read(text, j, "strict", cfg.strict);
  read(text, j, "delta", cfg.delta);
  read(text, j, "bound_constant", cfg.bound_constant);
  std::string placement = "random", oracle = "exact", gain = "teacher", learner = "lfd";
  read(text, j, "placement", placement);
  read(text, j, "oracle", oracle);
  read(text, j, "gain", gain);
  read(text, j, "learner", learner);
  try {
    s.placement = placement_from_string(placement);
  } catch (const SpecError& e) {
    schema_error(text, "placement", e.what());
  }
  if (oracle != "exact" && oracle != "sampled") schema_error(text, "oracle", "expected exact or sampled");
  cfg.sampled = oracle == "sampled";
  if (gain != "teacher" && gain != "information") schema_error(text, "gain", "expected teacher or information");
  cfg.gain = gain == "teacher" ? GainKind::teacher : GainKind::information;
  if (learner != "lfd" && learner != "naive") schema_error(text, "learner", "expected lfd or naive");
  cfg.naive = learner == "naive";
  if (j.contains("agnostic")) {
    const json& a = j.at("agnostic");
    if (!a.is_object()) schema_error(text, "agnostic", "expected an object");
    check_keys(text, a, {"mode", "c"});
    std::string mode = "None";
    read(text, a, "mode", mode);
    try {
      cfg.agnostic = agnostic_mode_from_string(mode);
    } catch (const SpecError& e) {
      schema_error(text, "mode", e.what());
    }
    if (a.contains("c") && !a.at("c").is_null()) {
      std::size_t c = 0;
      read(text, a, "c", c);
      cfg.c = c;
    }
  }
  if (j.contains("sweep")) {
    const json& w = j.at("sweep");
    if (!w.is_object()) schema_error(text, "sweep", "expected an object");
    check_keys(text, w, {"axis", "values"});
    SweepConfig sw;
    read(text, w, "axis", sw.axis);
    read(text, w, "values", sw.values);
    cfg.sweep = sw;
  }
  if (j.contains("adversary")) {
    const json& a = j.at("adversary");
    if (!a.is_object()) schema_error(text, "adversary", "expected an object");
    check_keys(text, a, {"pool", "S", "trials", "budgets", "regime", "regime_trials"});
    AdversaryConfig adv;
    read(text, a, "pool", adv.pool);
    read(text, a, "S", adv.S);
    read(text, a, "trials", adv.trials);
    read(text, a, "budgets", adv.budgets);
    read(text, a, "regime_trials", adv.regime_trials);
    if (a.contains("regime") && !a.at("regime").is_null()) {
      std::string r;
      read(text, a, "regime", r);
      try {
        adv.regime = regime_from_string(r);
      } catch (const SpecError& e) {
        schema_error(text, "regime", e.what());
      }
    }
    cfg.adversary = adv;
  }
  try {
    cfg.validate();
  } catch (const SpecError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json to_json(const ExperimentConfig& cfg) {
  const StreamSpec& s = cfg.stream;
  json j = {{"family", to_string(s.family)},
            {"N", s.N},
            {"K", s.K},
            {"d", s.d},
            {"s", s.s},
            {"t", s.t},
            {"m", s.m},
            {"r", s.r},
            {"S", s.S},
            {"seed", s.seed},
            {"trials", cfg.trials},
            {"strict", cfg.strict},
            {"placement", to_string(s.placement)},
            {"metafeature_depth", s.metafeature_depth},
            {"p_min", s.p_min},
            {"K1", s.K1},
            {"K2", s.K2},
            {"oracle", cfg.sampled ? "sampled" : "exact"},
            {"gain", cfg.gain == GainKind::teacher ? "teacher" : "information"},
            {"learner", cfg.naive ? "naive" : "lfd"},
            {"delta", cfg.delta},
            {"grid_log2", s.grid_log2},
            {"bound_constant", cfg.bound_constant}};
  j["agnostic"] = {{"mode", to_string(cfg.agnostic)}, {"c", cfg.c ? json(*cfg.c) : json(nullptr)}};
  if (cfg.sweep) j["sweep"] = {{"axis", cfg.sweep->axis}, {"values", cfg.sweep->values}};
  if (cfg.adversary) {
    const auto& a = *cfg.adversary;
    j["adversary"] = {{"pool", a.pool},
                      {"S", a.S},
                      {"trials", a.trials},
                      {"budgets", a.budgets},
                      {"regime", a.regime ? json(to_string(*a.regime)) : json(nullptr)},
                      {"regime_trials", a.regime_trials}};
  }
  return j;
}

std::size_t bootstrap_tasks(const ExperimentConfig& cfg) {
  const StreamSpec& s = cfg.stream;
  std::size_t groups = 0;
  if (s.family == Family::semi_adversarial_trees) groups = s.K;
  if (s.family == Family::overcomplete_trees) groups = s.K2;
  if (groups == 0) return 0;
  double p = s.p_min > 0.0 ? s.p_min : 1.0 / static_cast<double>(groups);
  return std::min(bootstrap_count(p, cfg.delta, groups), s.m + s.r);
}

double envelope(const ExperimentConfig& cfg) {
  const StreamSpec& s = cfg.stream;
  const double S = static_cast<double>(s.S), N = static_cast<double>(s.N), K = static_cast<double>(s.K),
               m = static_cast<double>(good_count(cfg)), d = static_cast<double>(s.d), t = static_cast<double>(s.t),
               r = static_cast<double>(s.r);
  switch (cfg.agnostic) {
    case AgnosticMode::restart: return S * (r * K * N + m * K);
    case AgnosticMode::expansion: return S * (K * N + m * (K + r));
    case AgnosticMode::combined: return S * (std::sqrt(r * K * N * m) + m * K);
    case AgnosticMode::none: break;
  }
  const double boot = static_cast<double>(bootstrap_tasks(cfg));
  switch (s.family) {
    case Family::trees: return S * (K * N + m * K * d);
    case Family::semi_adversarial_trees: return S * (boot * N + m * (K + d));
    case Family::anchor_trees: return S * (K * N + m * (K + d));
    case Family::lists: return S * (K * K * N + m * (K * K + d));
    case Family::monomials: return S * (K * N + m * K) + m * d;
    case Family::polynomials: return S * (K * N + m * (K + t * d));
    case Family::overcomplete_trees: {
      const double K1 = static_cast<double>(s.K1), K2 = static_cast<double>(s.K2);
      return (K1 * K2 + boot) * S * N + S * m * (K1 * t + K2 + d);
    }
  }
  return 0.0;
}

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial) {
  StreamSpec spec = cfg.stream;
  spec.seed = trial_seed(cfg.stream.seed, trial);
  const bool agnostic_stream = spec.r > 0 || cfg.agnostic != AgnosticMode::none;
  ProtocolConfig pc;
  pc.mode = cfg.agnostic;
  pc.K = spec.family == Family::overcomplete_trees ? spec.K1 * spec.K2 : spec.K;
  pc.c = cfg.agnostic == AgnosticMode::combined ? cfg.effective_c() : 0;
  pc.strict = cfg.strict;

  TrialResult out;
  out.trial = trial;
  out.seed = spec.seed;
  out.envelope = envelope(cfg);

  if (is_tree_family(spec.family)) {
    TreeStream st = agnostic_stream ? gen_agnostic_tree_stream(spec) : gen_tree_stream(spec);
    TreeLearnerOptions o;
    switch (spec.family) {
      case Family::lists: o.variant = TreeVariant::list; break;
      case Family::anchor_trees: o.variant = TreeVariant::anchor; break;
      case Family::overcomplete_trees: o.variant = TreeVariant::overcomplete; break;
      case Family::semi_adversarial_trees: o.variant = TreeVariant::semi_adversarial; break;
      default: o.variant = cfg.naive ? TreeVariant::naive : TreeVariant::general; break;
    }
    o.gain = cfg.gain;
    o.params = TreeProblemParams{spec.N, spec.d, spec.s, spec.K};
    o.K = spec.K;
    o.K1 = spec.K1;
    o.K2 = spec.K2;
    o.p_min = spec.p_min;
    o.delta = cfg.delta;
    TreeLearner learner(st.tasks, o);
    out.report = run_protocol(learner, pc);
  } else if (spec.family == Family::monomials) {
    MonomialStream st = agnostic_stream ? gen_agnostic_monomial_stream(spec) : gen_monomial_stream(spec);
    MonomialLearnerOptions o{cfg.sampled ? EstimationMode::sampled : EstimationMode::exact,
                             static_cast<unsigned>(spec.d), spec.K, cfg.naive};
    MonomialLearner learner(st.tasks, st.dist, spec.N, o);
    out.report = run_protocol(learner, pc);
    out.mismatches = learner.mismatches();
  } else {
    PolynomialStream st = agnostic_stream ? gen_agnostic_poly_stream(spec) : gen_poly_stream(spec);
    OrthogonalBasis basis = build_orthogonal_basis(st.dist, static_cast<unsigned>(spec.d));
    PolynomialLearnerOptions o;
    o.exact = !cfg.sampled;
    o.d = static_cast<unsigned>(spec.d);
    o.t = spec.t;
    o.K = spec.K;
    o.naive = cfg.naive;
    PolynomialLearner learner(st.tasks, basis, spec.N, o);
    out.report = run_protocol(learner, pc);
    out.mismatches = learner.mismatches();
  }

  const bool agnostic_scored = agnostic_stream;
  const std::size_t measured = agnostic_scored ? out.report.good_probes : out.report.total_probes;
  const double limit = cfg.bound_constant * out.envelope;
  out.report.bound_checks.push_back({agnostic_scored ? "good_probes_within_envelope" : "probes_within_envelope",
                                     static_cast<double>(measured) <= limit,
                                     std::to_string(measured) + " <= " + num(limit)});
  return out;
}

std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, unsigned jobs) {
  std::vector<TrialResult> results(cfg.trials);
  parallel_for(cfg.trials, jobs, [&](std::size_t k) { results[k] = run_trial(cfg, k); });
  return results;
}

std::string csv_header() {
  return "schema_version,family,trial,task_index,outcome,probes,per_example_max,rep_size,restarts,good,envelope\n";
}

std::string csv_report(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
  (void)cfg;
  std::ostringstream out;
  out << csv_header();
  for (const auto& r : results)
    for (const auto& t : r.report.tasks)
      out << kSchemaVersion << ',' << r.report.family << ',' << r.trial << ',' << t.task_index << ','
          << to_string(t.outcome) << ',' << t.probes << ',' << t.per_example_max << ',' << t.rep_size << ','
          << t.restart_epoch << ',' << (t.good ? 1 : 0) << ',' << num(r.envelope) << '\n';
  return out.str();
}

json json_report(const ExperimentConfig& cfg, const std::vector<TrialResult>& results) {
  json trials = json::array();
  for (const auto& r : results) {
    json checks = json::array();
    for (const auto& c : r.report.bound_checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    json tasks = json::array();
    for (const auto& t : r.report.tasks)
      tasks.push_back({{"task_index", t.task_index},
                       {"outcome", to_string(t.outcome)},
                       {"probes", t.probes},
                       {"per_example_max", t.per_example_max},
                       {"rep_size", t.rep_size},
                       {"restart_epoch", t.restart_epoch},
                       {"good", t.good}});
    trials.push_back({{"trial", r.trial},
                      {"seed", r.seed},
                      {"family", r.report.family},
                      {"total_probes", r.report.total_probes},
                      {"good_probes", r.report.good_probes},
                      {"scratch_count", r.report.scratch_count},
                      {"lfd_failures", r.report.lfd_failures},
                      {"restarts", r.report.restarts},
                      {"envelope", r.envelope},
                      {"mismatches", r.mismatches},
                      {"rep_size_trace", r.report.rep_size_trace},
                      {"bound_checks", std::move(checks)},
                      {"tasks", std::move(tasks)}});
  }
  return {{"schema_version", kSchemaVersion}, {"config", to_json(cfg)}, {"trials", std::move(trials)}};
}

std::string sweep_csv_header() {
  return "schema_version,family,axis,value,trial,total_probes,good_probes,scratch,restarts,envelope\n";
}

std::string run_sweep(const ExperimentConfig& cfg, unsigned jobs, bool* all_pass) {
  if (!cfg.sweep) throw UsageError("config has no sweep section");
  if (cfg.sweep->values.empty()) throw UsageError("sweep values must not be empty");
  std::ostringstream out;
  out << sweep_csv_header();
  bool pass = true;
  for (std::size_t v : cfg.sweep->values) {
    ExperimentConfig c = cfg;
    const std::string& axis = cfg.sweep->axis;
    if (axis == "m") c.stream.m = v;
    if (axis == "N") c.stream.N = v;
    if (axis == "K") c.stream.K = v;
    if (axis == "r") c.stream.r = v;
    if (axis == "c") c.c = v;
    try {
      c.validate();
    } catch (const SpecError& e) {
      throw UsageError("sweep value " + std::to_string(v) + ": " + e.what());
    }
    auto results = run_trials(c, jobs);
    for (const auto& r : results) {
      pass = pass && r.report.all_pass();
      out << kSchemaVersion << ',' << r.report.family << ',' << axis << ',' << v << ',' << r.trial << ','
          << r.report.total_probes << ',' << r.report.good_probes << ',' << r.report.scratch_count << ','
          << r.report.restarts << ',' << num(r.envelope) << '\n';
    }
  }
  if (all_pass) *all_pass = pass;
  return out.str();
}

std::vector<GameStats> run_game(const AdversaryConfig& adv, std::uint64_t seed) {
  struct Named {
    const char* name;
    GameLearner learner;
  };
  const std::vector<Named> learners = {{"column_scan", column_scan_learner}, {"random_scan", random_scan_learner}};
  std::vector<GameStats> out;
  for (std::size_t b : adv.budgets) {
    for (const auto& l : learners) {
      GameStats st;
      st.learner = l.name;
      st.budget = b;
      st.trials = adv.trials;
      const std::uint64_t budget_seed = trial_seed(seed, b);
      for (std::size_t k = 0; k < adv.trials; ++k) {
        auto res = play_single_feature_game(l.learner, b, adv.pool, adv.S, trial_seed(budget_seed, k));
        if (!res.win) ++st.failures;
      }
      const double n = static_cast<double>(adv.trials);
      st.rate = static_cast<double>(st.failures) / n;
      // Wilson interval at z = 1.96
      const double z = 1.96, z2 = z * z;
      const double centre = (st.rate + z2 / (2 * n)) / (1 + z2 / n);
      const double half = z * std::sqrt(st.rate * (1 - st.rate) / n + z2 / (4 * n * n)) / (1 + z2 / n);
      st.ci_low = std::max(0.0, centre - half);
      st.ci_high = std::min(1.0, centre + half);
      const double pool = static_cast<double>(adv.pool);
      st.lemma_bound = std::max(0.0, (pool - static_cast<double>(b) / static_cast<double>(adv.S) - 1.0) / pool);
      out.push_back(st);
    }
  }
  return out;
}

std::string game_csv(const AdversaryConfig& adv, const std::vector<GameStats>& stats) {
  std::ostringstream out;
  out << "schema_version,learner,pool,S,budget,trials,failures,failure_rate,ci_low,ci_high,lemma_bound\n";
  for (const auto& s : stats)
    out << kSchemaVersion << ',' << s.learner << ',' << adv.pool << ',' << adv.S << ',' << s.budget << ','
        << s.trials << ',' << s.failures << ',' << num(s.rate) << ',' << num(s.ci_low) << ',' << num(s.ci_high)
        << ',' << num(s.lemma_bound) << '\n';
  return out.str();
}

std::vector<RegimeRun> run_regime(const ExperimentConfig& cfg, unsigned jobs) {
  if (!cfg.adversary || !cfg.adversary->regime) throw UsageError("config has no adversary regime");
  const StreamSpec& s = cfg.stream;
  const Regime regime = *cfg.adversary->regime;
  std::vector<RegimeRun> runs(cfg.adversary->regime_trials);
  parallel_for(runs.size(), jobs, [&](std::size_t k) {
    TreeStream st = gen_adversary_stream(regime, s.N, s.K, s.m, s.r, s.S, trial_seed(s.seed, k));
    TreeLearnerOptions o;
    o.gain = cfg.gain;
    o.params = TreeProblemParams{s.N, 1, 1, s.K};
    o.K = s.K;
    TreeLearner learner(st.tasks, o);
    RunReport rep = run_protocol(learner, {AgnosticMode::none, 0, 0, false});
    RegimeRun r;
    r.trial = k;
    r.tasks = st.tasks.size();
    for (const auto& t : st.tasks) r.good_tasks += t.good ? 1 : 0;
    r.total_probes = rep.total_probes;
    r.good_probes = rep.good_probes;
    r.scratch = rep.scratch_count;
    r.envelope = static_cast<double>(s.S) *
                 (static_cast<double>(s.K) * static_cast<double>(s.N) + static_cast<double>(s.m) * static_cast<double>(s.K));
    runs[k] = r;
  });
  return runs;
}

std::string regime_csv(const ExperimentConfig& cfg, const std::vector<RegimeRun>& runs) {
  std::ostringstream out;
  out << "schema_version,regime,trial,tasks,good_tasks,total_probes,good_probes,scratch,envelope\n";
  for (const auto& r : runs)
    out << kSchemaVersion << ',' << to_string(*cfg.adversary->regime) << ',' << r.trial << ',' << r.tasks << ','
        << r.good_tasks << ',' << r.total_probes << ',' << r.good_probes << ',' << r.scratch << ','
        << num(r.envelope) << '\n';
  return out.str();
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs) {
  auto results = run_trials(cfg, jobs);
  write_file(out_dir, "report.json", json_report(cfg, results).dump(2) + "\n");
  write_file(out_dir, "report.csv", csv_report(cfg, results));
  bool pass = true;
  for (const auto& r : results)
    for (const auto& c : r.report.bound_checks)
      if (!c.pass) {
        pass = false;
        std::cerr << "trial " << r.trial << ": check " << c.name << " failed " << c.detail << '\n';
      }
  return cfg.strict && !pass ? 1 : 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs) {
  bool pass = true;
  std::string csv = run_sweep(cfg, jobs, &pass);
  write_file(out_dir, "sweep.csv", csv);
  return cfg.strict && !pass ? 1 : 0;
}

int cmd_adversary(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs) {
  if (!cfg.adversary) throw UsageError("config has no adversary section");
  auto stats = run_game(*cfg.adversary, cfg.stream.seed);
  write_file(out_dir, "adversary.csv", game_csv(*cfg.adversary, stats));
  if (cfg.adversary->regime) write_file(out_dir, "regime.csv", regime_csv(cfg, run_regime(cfg, jobs)));
  return 0;
}

}  // namespace lifelong
