#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifelong/protocol.hpp"
#include "lifelong/streams.hpp"

namespace lifelong {

inline constexpr int kSchemaVersion = 1;

struct SweepConfig {
  std::string axis;  // m | N | K | r | c
  std::vector<std::size_t> values;
};

struct AdversaryConfig {
  std::size_t pool = 100;
  std::size_t S = 1;
  std::size_t trials = 2000;
  std::vector<std::size_t> budgets;
  std::optional<Regime> regime;
  std::size_t regime_trials = 1;
};

struct ExperimentConfig {
  StreamSpec stream;
  AgnosticMode agnostic = AgnosticMode::none;
  std::optional<std::size_t> c;  // combined cap; derived from r, K, N, m when absent
  std::size_t trials = 1;
  bool strict = false;
  bool sampled = false;  // monomial estimator / polynomial oracle
  bool naive = false;    // seen-features baseline learners
  GainKind gain = GainKind::teacher;
  double delta = 0.1;
  double bound_constant = 4.0;
  std::optional<SweepConfig> sweep;
  std::optional<AdversaryConfig> adversary;

  void validate() const;
  std::size_t effective_c() const;
};

// Parses JSON text; malformed input and schema errors raise UsageError whose
// message carries the line number when one is known.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Theoretical probe envelope of the configured family and agnostic mode (constant 1).
double envelope(const ExperimentConfig& cfg);
std::size_t bootstrap_tasks(const ExperimentConfig& cfg);

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  RunReport report;
  double envelope = 0.0;
  std::size_t mismatches = 0;  // sampled-mode hypotheses that differ from the target
};

TrialResult run_trial(const ExperimentConfig& cfg, std::size_t trial);
// Trials run on up to `jobs` threads; results come back in trial order.
std::vector<TrialResult> run_trials(const ExperimentConfig& cfg, unsigned jobs);

std::string csv_header();
std::string csv_report(const ExperimentConfig& cfg, const std::vector<TrialResult>& results);
nlohmann::json json_report(const ExperimentConfig& cfg, const std::vector<TrialResult>& results);

std::string sweep_csv_header();
std::string run_sweep(const ExperimentConfig& cfg, unsigned jobs, bool* all_pass = nullptr);

struct GameStats {
  std::string learner;
  std::size_t budget = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double lemma_bound = 0.0;  // (pool - budget/S - 1) / pool
};

std::vector<GameStats> run_game(const AdversaryConfig& adv, std::uint64_t seed);
std::string game_csv(const AdversaryConfig& adv, const std::vector<GameStats>& stats);

struct RegimeRun {
  std::size_t trial = 0;
  std::size_t tasks = 0;
  std::size_t good_tasks = 0;
  std::size_t total_probes = 0;
  std::size_t good_probes = 0;
  std::size_t scratch = 0;
  double envelope = 0.0;  // S(KN + mK)
};

std::vector<RegimeRun> run_regime(const ExperimentConfig& cfg, unsigned jobs);
std::string regime_csv(const ExperimentConfig& cfg, const std::vector<RegimeRun>& runs);

// Subcommands. They write files into out_dir and return the process exit status.
int cmd_run(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs);
int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs);
int cmd_adversary(const ExperimentConfig& cfg, const std::string& out_dir, unsigned jobs);

}  // namespace lifelong
