#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lifelong/costly_data.hpp"
#include "lifelong/monomial.hpp"
#include "lifelong/polynomial.hpp"
#include "lifelong/streams.hpp"
#include "lifelong/tree_lifelong.hpp"

namespace lifelong {

enum class AgnosticMode { none, restart, expansion, combined };

std::string to_string(AgnosticMode m);
AgnosticMode agnostic_mode_from_string(const std::string& s);

struct ProtocolConfig {
  AgnosticMode mode = AgnosticMode::none;
  std::size_t K = 0;  // failures allowed between restarts (restart, combined)
  std::size_t c = 0;  // extra failures for the combined protocol
  bool strict = false;
};

enum class TaskOutcome { lfd, scratch, bootstrap };

std::string to_string(TaskOutcome o);

struct TaskRecord {
  std::size_t task_index = 0;
  TaskOutcome outcome = TaskOutcome::lfd;
  std::size_t probes = 0;
  std::size_t per_example_max = 0;
  std::size_t rep_size = 0;  // after the task
  std::size_t restart_epoch = 0;
  bool good = true;
  bool lfd_probe_bound_ok = true;  // meaningful when an LFD attempt ran
};

struct BoundCheck {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct RunReport {
  std::string family;
  std::vector<TaskRecord> tasks;
  std::size_t total_probes = 0;
  std::size_t good_probes = 0;
  std::size_t scratch_count = 0;
  std::size_t lfd_failures = 0;  // failed LFD attempts (bootstrap tasks excluded)
  std::size_t restarts = 0;
  std::vector<std::size_t> rep_size_trace;
  std::vector<BoundCheck> bound_checks;

  bool all_pass() const;
  EvaluationReport evaluation() const;
};

// One stream plus the learning state of one family. The protocol drives it task by task.
class FamilyLearner {
 public:
  virtual ~FamilyLearner() = default;

  virtual std::string family() const = 0;
  virtual std::size_t num_tasks() const = 0;
  virtual bool good(std::size_t j) const = 0;
  // Tasks learned from scratch unconditionally (bootstrap phases).
  virtual bool bootstrap(std::size_t j) const {
    (void)j;
    return false;
  }
  // LFD with the current representation; true when the task is learned.
  // Throws SoundnessViolation when a returned hypothesis is wrong.
  virtual bool attempt(std::size_t j) = 0;
  // Probes everything and learns from scratch; ImproveRep runs when update_rep is set.
  virtual void learn_from_scratch(std::size_t j, bool update_rep) = 0;
  virtual void reset_representation() = 0;
  virtual std::size_t rep_size() const = 0;
  // Per-example LFD probe bound for the last attempt on task j.
  virtual bool lfd_probe_bound(std::size_t j) const = 0;
  virtual ProbeCounts probes(std::size_t j) const = 0;
  // Scratch-count envelope of the family in the realizable setting, if any.
  virtual std::optional<std::size_t> scratch_bound() const { return std::nullopt; }
};

RunReport run_protocol(FamilyLearner& learner, const ProtocolConfig& cfg);

// Wrappers naming the agnostic variants.
RunReport run_restart_protocol(FamilyLearner& learner, std::size_t K, bool strict = false);
RunReport run_combined_protocol(FamilyLearner& learner, std::size_t K, std::size_t c, bool strict = false);
RunReport run_expansion_protocol(FamilyLearner& learner, bool strict = false);

// c = round(sqrt(rKN/m)), clamped to [1, max(1, r)].
std::size_t combined_cap(std::size_t r, std::size_t K, std::size_t N, std::size_t m);

enum class TreeVariant { general, list, anchor, overcomplete, semi_adversarial, naive };
enum class GainKind { teacher, information };

struct TreeLearnerOptions {
  TreeVariant variant = TreeVariant::general;
  GainKind gain = GainKind::teacher;
  TreeProblemParams params;
  std::size_t K = 0;   // metafeature count for the scratch envelope
  std::size_t K1 = 0;  // overcomplete
  std::size_t K2 = 0;
  double p_min = 0.0;  // semi-adversarial and overcomplete bootstrap
  double delta = 0.1;
};

class TreeLearner final : public FamilyLearner {
 public:
  TreeLearner(std::vector<TreeTask>& tasks, TreeLearnerOptions opts);

  std::string family() const override;
  std::size_t num_tasks() const override { return tasks_.size(); }
  bool good(std::size_t j) const override { return tasks_[j].good; }
  bool bootstrap(std::size_t j) const override { return j < n_boot_; }
  bool attempt(std::size_t j) override;
  void learn_from_scratch(std::size_t j, bool update_rep) override;
  void reset_representation() override;
  std::size_t rep_size() const override;
  bool lfd_probe_bound(std::size_t j) const override;
  ProbeCounts probes(std::size_t j) const override { return counts_of(tasks_[j].data.ledger()); }
  std::optional<std::size_t> scratch_bound() const override;

  const MetafeatureSet& representation() const { return rep_; }
  const std::set<Feature>& anchors() const { return anchors_; }
  std::size_t bootstrap_tasks() const { return n_boot_; }

 private:
  std::unique_ptr<GainFunction> gain_for(const TreeTask& task) const;

  std::vector<TreeTask>& tasks_;
  TreeLearnerOptions opts_;
  std::size_t n_boot_ = 0;
  MetafeatureSet rep_;
  std::set<Feature> seen_;     // naive baseline
  std::set<Feature> anchors_;  // overcomplete
  std::optional<LfdFailure> last_failure_;
  std::size_t rep_at_attempt_ = 0;
};

struct MonomialLearnerOptions {
  EstimationMode mode = EstimationMode::exact;
  unsigned d = 1;
  std::size_t K = 0;
  bool naive = false;
};

class MonomialLearner final : public FamilyLearner {
 public:
  MonomialLearner(std::vector<MonomialTask>& tasks, const ProductDistribution& dist, std::size_t N,
                  MonomialLearnerOptions opts);

  std::string family() const override { return opts_.naive ? "Monomials-naive" : "Monomials"; }
  std::size_t num_tasks() const override { return tasks_.size(); }
  bool good(std::size_t j) const override { return tasks_[j].good; }
  bool attempt(std::size_t j) override;
  void learn_from_scratch(std::size_t j, bool update_rep) override;
  void reset_representation() override;
  std::size_t rep_size() const override { return opts_.naive ? seen_.size() : rep_.rank(); }
  bool lfd_probe_bound(std::size_t j) const override;
  ProbeCounts probes(std::size_t j) const override;
  std::optional<std::size_t> scratch_bound() const override { return opts_.K; }

  const RepresentationMatrix& representation() const { return rep_; }
  // Tasks whose returned monomial differed from the target (sampled mode only; exact mode throws).
  std::size_t mismatches() const { return mismatches_; }

 private:
  PowerEstimator estimator(const MonomialTask& t) const { return {opts_.mode, &t.target}; }
  void check(const MonomialTask& t, const Monomial& g);

  std::vector<MonomialTask>& tasks_;
  const ProductDistribution& dist_;
  std::size_t N_;
  MonomialLearnerOptions opts_;
  RepresentationMatrix rep_;
  std::set<Feature> seen_;
  std::size_t rep_at_attempt_ = 0;
  std::size_t mismatches_ = 0;
};

struct PolynomialLearnerOptions {
  bool exact = true;
  unsigned d = 1;
  unsigned t = 1;
  std::size_t K = 0;
  bool naive = false;
  SampledOracleOptions sampled;
};

class PolynomialLearner final : public FamilyLearner {
 public:
  PolynomialLearner(std::vector<PolynomialTask>& tasks, const OrthogonalBasis& basis, std::size_t N,
                    PolynomialLearnerOptions opts);

  std::string family() const override { return opts_.naive ? "Polynomials-naive" : "Polynomials"; }
  std::size_t num_tasks() const override { return tasks_.size(); }
  bool good(std::size_t j) const override { return tasks_[j].good; }
  bool attempt(std::size_t j) override;
  void learn_from_scratch(std::size_t j, bool update_rep) override;
  void reset_representation() override;
  std::size_t rep_size() const override { return opts_.naive ? seen_.size() : rep_.rank(); }
  bool lfd_probe_bound(std::size_t j) const override;
  ProbeCounts probes(std::size_t j) const override;
  std::optional<std::size_t> scratch_bound() const override { return opts_.K; }

  const RepresentationMatrix& representation() const { return rep_; }
  std::size_t mismatches() const { return mismatches_; }

 private:
  std::unique_ptr<CorrelationOracle> oracle_for(PolynomialTask& t) const;
  void check(const PolynomialTask& t, const Polynomial& G);

  std::vector<PolynomialTask>& tasks_;
  const OrthogonalBasis& basis_;
  std::size_t N_;
  PolynomialLearnerOptions opts_;
  RepresentationMatrix rep_;
  std::set<Feature> seen_;
  std::size_t rep_at_attempt_ = 0;
  std::size_t mismatches_ = 0;
};

}  // namespace lifelong
