#include "lifelong/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lifelong {

std::string to_string(AgnosticMode m) {
  switch (m) {
    case AgnosticMode::none: return "None";
    case AgnosticMode::restart: return "Restart";
    case AgnosticMode::expansion: return "Expansion";
    case AgnosticMode::combined: return "Combined";
  }
  return "?";
}

AgnosticMode agnostic_mode_from_string(const std::string& s) {
  if (s == "None") return AgnosticMode::none;
  if (s == "Restart") return AgnosticMode::restart;
  if (s == "Expansion") return AgnosticMode::expansion;
  if (s == "Combined") return AgnosticMode::combined;
  throw SpecError("unknown agnostic mode: " + s);
}

std::string to_string(TaskOutcome o) {
  switch (o) {
    case TaskOutcome::lfd: return "lfd";
    case TaskOutcome::scratch: return "scratch";
    case TaskOutcome::bootstrap: return "bootstrap";
  }
  return "?";
}

bool RunReport::all_pass() const {
  return std::all_of(bound_checks.begin(), bound_checks.end(), [](const BoundCheck& c) { return c.pass; });
}

EvaluationReport RunReport::evaluation() const {
  std::vector<ProbeCounts> counts;
  std::vector<bool> scratch, good;
  for (const auto& t : tasks) {
    counts.push_back({t.probes, t.per_example_max});
    scratch.push_back(t.outcome != TaskOutcome::lfd);
    good.push_back(t.good);
  }
  EvaluationReport e = make_report(counts, scratch, good);
  e.restart_count = restarts;
  return e;
}

namespace {

std::string fmt(std::size_t lhs, const char* op, double rhs) {
  std::ostringstream s;
  s << lhs << ' ' << op << ' ' << rhs;
  return s.str();
}

}  // namespace

RunReport run_protocol(FamilyLearner& learner, const ProtocolConfig& cfg) {
  if (cfg.mode == AgnosticMode::restart && cfg.K == 0) throw UsageError("restart protocol needs K >= 1");
  if (cfg.mode == AgnosticMode::combined && cfg.c == 0) throw UsageError("combined protocol needs c >= 1");
  const std::size_t cap = cfg.mode == AgnosticMode::restart    ? cfg.K
                          : cfg.mode == AgnosticMode::combined ? cfg.K + cfg.c
                                                               : std::numeric_limits<std::size_t>::max();
  RunReport report;
  report.family = learner.family();
  std::size_t since_restart = 0;
  bool probe_bound_ok = true;
  bool trace_ok = true;
  std::size_t bad = 0;
  for (std::size_t j = 0; j < learner.num_tasks(); ++j) {
    TaskRecord rec;
    rec.task_index = j;
    rec.good = learner.good(j);
    if (!rec.good) ++bad;
    const std::size_t before = learner.rep_size();
    if (learner.bootstrap(j)) {
      learner.learn_from_scratch(j, true);
      rec.outcome = TaskOutcome::bootstrap;
      ++report.scratch_count;
    } else {
      bool ok = learner.attempt(j);
      rec.lfd_probe_bound_ok = learner.lfd_probe_bound(j);
      probe_bound_ok = probe_bound_ok && rec.lfd_probe_bound_ok;
      if (ok) {
        rec.outcome = TaskOutcome::lfd;
      } else {
        rec.outcome = TaskOutcome::scratch;
        ++report.lfd_failures;
        ++report.scratch_count;
        // The failure past the cap is learned from scratch, then the representation
        // is erased without absorbing it; the next epoch starts empty.
        if (since_restart >= cap) {
          learner.learn_from_scratch(j, false);
          learner.reset_representation();
          ++report.restarts;
          since_restart = 0;
        } else {
          learner.learn_from_scratch(j, true);
          ++since_restart;
        }
      }
    }
    auto counts = learner.probes(j);
    rec.probes = counts.total;
    rec.per_example_max = counts.per_example_max;
    rec.rep_size = learner.rep_size();
    rec.restart_epoch = report.restarts;
    bool restarted_here = !report.tasks.empty() && report.tasks.back().restart_epoch != rec.restart_epoch;
    if (!restarted_here && rec.rep_size < before) trace_ok = false;
    report.total_probes += rec.probes;
    if (rec.good) report.good_probes += rec.probes;
    report.rep_size_trace.push_back(rec.rep_size);
    report.tasks.push_back(rec);
  }

  report.bound_checks.push_back({"lfd_per_example_probes", probe_bound_ok, ""});
  report.bound_checks.push_back({"rep_size_monotone_between_restarts", trace_ok, ""});
  if (cfg.mode == AgnosticMode::none) {
    if (auto b = learner.scratch_bound())
      report.bound_checks.push_back(
          {"scratch_count", report.scratch_count <= *b, fmt(report.scratch_count, "<=", static_cast<double>(*b))});
  }
  if (cfg.mode == AgnosticMode::restart || cfg.mode == AgnosticMode::combined) {
    report.bound_checks.push_back(
        {"restarts_at_most_r", report.restarts <= bad, fmt(report.restarts, "<=", static_cast<double>(bad))});
  }
  if (cfg.mode == AgnosticMode::restart) {
    double lim = static_cast<double>((bad + 1) * (cfg.K + 1));
    report.bound_checks.push_back(
        {"scratch_at_most_(r+1)(K+1)", static_cast<double>(report.scratch_count) <= lim,
         fmt(report.scratch_count, "<=", lim)});
  }
  if (cfg.mode == AgnosticMode::combined) {
    double lim = static_cast<double>(bad) / static_cast<double>(cfg.c + 1) + 1.0;
    report.bound_checks.push_back(
        {"epochs_at_most_r/(c+1)+1", static_cast<double>(report.restarts + 1) <= lim,
         fmt(report.restarts + 1, "<=", lim)});
  }
  return report;
}

RunReport run_restart_protocol(FamilyLearner& learner, std::size_t K, bool strict) {
  return run_protocol(learner, {AgnosticMode::restart, K, 0, strict});
}

RunReport run_combined_protocol(FamilyLearner& learner, std::size_t K, std::size_t c, bool strict) {
  return run_protocol(learner, {AgnosticMode::combined, K, c, strict});
}

RunReport run_expansion_protocol(FamilyLearner& learner, bool strict) {
  return run_protocol(learner, {AgnosticMode::expansion, 0, 0, strict});
}

std::size_t combined_cap(std::size_t r, std::size_t K, std::size_t N, std::size_t m) {
  if (m == 0) throw UsageError("m must be positive");
  double c = std::round(std::sqrt(static_cast<double>(r) * static_cast<double>(K) * static_cast<double>(N) /
                                  static_cast<double>(m)));
  return std::clamp<std::size_t>(static_cast<std::size_t>(c), 1, std::max<std::size_t>(1, r));
}

// ---- trees ----

TreeLearner::TreeLearner(std::vector<TreeTask>& tasks, TreeLearnerOptions opts)
    : tasks_(tasks), opts_(std::move(opts)) {
  opts_.params.validate();
  if (opts_.variant == TreeVariant::semi_adversarial || opts_.variant == TreeVariant::overcomplete) {
    std::size_t groups = opts_.variant == TreeVariant::overcomplete ? opts_.K2 : opts_.K;
    if (groups == 0) throw UsageError("bootstrap needs a positive metafeature group count");
    double p = opts_.p_min > 0.0 ? opts_.p_min : 1.0 / static_cast<double>(groups);
    n_boot_ = std::min(bootstrap_count(p, opts_.delta, groups), tasks_.size());
  }
}

std::string TreeLearner::family() const {
  switch (opts_.variant) {
    case TreeVariant::general: return "Trees";
    case TreeVariant::list: return "Lists";
    case TreeVariant::anchor: return "AnchorTrees";
    case TreeVariant::overcomplete: return "OvercompleteTrees";
    case TreeVariant::semi_adversarial: return "SemiAdversarialTrees";
    case TreeVariant::naive: return "Trees-naive";
  }
  return "?";
}

std::unique_ptr<GainFunction> TreeLearner::gain_for(const TreeTask& task) const {
  if (opts_.gain == GainKind::teacher) return std::make_unique<TeacherGain>(task.teacher());
  return std::make_unique<InformationGain>();
}

bool TreeLearner::attempt(std::size_t j) {
  TreeTask& task = tasks_[j];
  auto gain = gain_for(task);
  rep_at_attempt_ = rep_size();
  LfdOutcome out = opts_.variant == TreeVariant::naive ? naive_lfd_seen_features(task.data, seen_, *gain, opts_.params)
                                                       : lfd_tree(task.data, rep_, *gain, opts_.params);
  if (auto* ok = std::get_if<LfdLearned>(&out)) {
    const auto& g = ok->tree;
    if (!g.complete() || g.depth() > opts_.params.d || g.size() > opts_.params.s || !consistent_with(g, task.data))
      throw SoundnessViolation("task " + std::to_string(j) + ": learned tree is not consistent within bounds");
    last_failure_.reset();
    return true;
  }
  last_failure_ = std::get<LfdFailure>(std::move(out));
  return false;
}

void TreeLearner::learn_from_scratch(std::size_t j, bool update_rep) {
  TreeTask& task = tasks_[j];
  auto gain = gain_for(task);
  DecisionTree g = learn_tree_scratch(task.data, *gain, opts_.params);
  if (!consistent_with(g, task.data))
    throw SoundnessViolation("task " + std::to_string(j) + ": scratch tree is not consistent");
  if (!update_rep) {
    last_failure_.reset();
    return;
  }
  switch (opts_.variant) {
    case TreeVariant::naive:
      for (Feature v : g.variables()) seen_.insert(v);
      return;
    case TreeVariant::semi_adversarial:
      rep_.add(g);
      return;
    case TreeVariant::overcomplete:
      if (g.is_internal(g.root())) anchors_.insert(g.node(g.root()).var);
      rep_ = improve_rep_overcomplete(std::move(rep_), g, anchors_);
      return;
    default:
      break;
  }
  if (!last_failure_) throw InternalConsistencyError("ImproveRep called without a failed LFD attempt");
  switch (opts_.variant) {
    case TreeVariant::general:
      rep_ = improve_rep_tree(std::move(rep_), g, *last_failure_);
      break;
    case TreeVariant::list:
      rep_ = improve_rep_list(std::move(rep_), g, last_failure_->partial);
      break;
    case TreeVariant::anchor:
      rep_ = improve_rep_anchor(std::move(rep_), g, *last_failure_);
      break;
    default:
      break;
  }
  last_failure_.reset();
}

void TreeLearner::reset_representation() {
  rep_.clear();
  seen_.clear();
}

std::size_t TreeLearner::rep_size() const {
  return opts_.variant == TreeVariant::naive ? seen_.size() : rep_.size();
}

bool TreeLearner::lfd_probe_bound(std::size_t j) const {
  std::size_t worst = tasks_[j].data.ledger().max_per_example();
  if (opts_.variant == TreeVariant::naive) return worst <= rep_at_attempt_;
  return per_example_probe_bound_check(tasks_[j].data.ledger(), rep_at_attempt_, opts_.params.d);
}

std::optional<std::size_t> TreeLearner::scratch_bound() const {
  const std::size_t K = opts_.K;
  switch (opts_.variant) {
    case TreeVariant::general:
    case TreeVariant::anchor:
      return K;
    case TreeVariant::list:
      return 3 * K * K;
    case TreeVariant::overcomplete:
      return opts_.K1 * opts_.K2 + n_boot_;
    case TreeVariant::naive:
      return K * opts_.params.s;
    case TreeVariant::semi_adversarial:
      return std::nullopt;
  }
  return std::nullopt;
}

// ---- monomials ----

MonomialLearner::MonomialLearner(std::vector<MonomialTask>& tasks, const ProductDistribution& dist, std::size_t N,
                                 MonomialLearnerOptions opts)
    : tasks_(tasks), dist_(dist), N_(N), opts_(opts), rep_(N) {}

void MonomialLearner::check(const MonomialTask& t, const Monomial& g) {
  if (g == t.target) return;
  if (opts_.mode == EstimationMode::exact)
    throw SoundnessViolation("exact-mode monomial differs from the target");
  ++mismatches_;
}

bool MonomialLearner::attempt(std::size_t j) {
  MonomialTask& t = tasks_[j];
  rep_at_attempt_ = rep_size();
  auto est = estimator(t);
  MonomialOutcome out = opts_.naive ? naive_lfd_seen_monomial(t.data, t.verify, seen_, dist_, opts_.d, est)
                                    : lfd_monomial(t.data, t.verify, rep_, dist_, opts_.d, est);
  if (auto* ok = std::get_if<MonomialLearned>(&out)) {
    check(t, ok->g);
    return true;
  }
  return false;
}

void MonomialLearner::learn_from_scratch(std::size_t j, bool update_rep) {
  MonomialTask& t = tasks_[j];
  Monomial g = learn_monomial_scratch(t.data, dist_, opts_.d, estimator(t));
  check(t, g);
  if (!update_rep) return;
  if (opts_.naive) {
    for (Feature i : g.support()) seen_.insert(i);
    return;
  }
  if (opts_.mode == EstimationMode::sampled && rep_.in_span(g)) return;
  rep_ = improve_rep_monomial(std::move(rep_), g);
}

void MonomialLearner::reset_representation() {
  rep_.clear();
  seen_.clear();
}

bool MonomialLearner::lfd_probe_bound(std::size_t j) const {
  const auto& t = tasks_[j];
  return t.data.ledger().max_per_example() <= rep_at_attempt_ && t.verify.ledger().max_per_example() <= opts_.d;
}

ProbeCounts MonomialLearner::probes(std::size_t j) const {
  const auto& t = tasks_[j];
  return {t.data.ledger().total() + t.verify.ledger().total(),
          std::max(t.data.ledger().max_per_example(), t.verify.ledger().max_per_example())};
}

// ---- polynomials ----

PolynomialLearner::PolynomialLearner(std::vector<PolynomialTask>& tasks, const OrthogonalBasis& basis, std::size_t N,
                                     PolynomialLearnerOptions opts)
    : tasks_(tasks), basis_(basis), N_(N), opts_(opts), rep_(N) {}

std::unique_ptr<CorrelationOracle> PolynomialLearner::oracle_for(PolynomialTask& t) const {
  if (opts_.exact) return std::make_unique<ExactCorrelationOracle>(t.target, basis_, &t.data);
  return std::make_unique<SampledCorrelationOracle>(t.data, basis_, opts_.sampled);
}

void PolynomialLearner::check(const PolynomialTask& t, const Polynomial& G) {
  if (G == t.target) return;
  if (opts_.exact) throw SoundnessViolation("exact-oracle polynomial differs from the target");
  ++mismatches_;
}

bool PolynomialLearner::attempt(std::size_t j) {
  PolynomialTask& t = tasks_[j];
  rep_at_attempt_ = rep_size();
  auto oracle = oracle_for(t);
  PolynomialOutcome out = opts_.naive ? naive_lfd_seen_polynomial(*oracle, t.verify, seen_, opts_.d, opts_.t)
                                      : lfd_polynomial(*oracle, t.verify, rep_, opts_.d, opts_.t);
  if (auto* ok = std::get_if<PolynomialLearned>(&out)) {
    check(t, ok->G);
    return true;
  }
  return false;
}

void PolynomialLearner::learn_from_scratch(std::size_t j, bool update_rep) {
  PolynomialTask& t = tasks_[j];
  auto oracle = oracle_for(t);
  Polynomial G = learn_polynomial_scratch(*oracle, opts_.d, opts_.t);
  check(t, G);
  if (!update_rep) return;
  if (opts_.naive) {
    for (Feature i : G.support()) seen_.insert(i);
    return;
  }
  rep_ = improve_rep_polynomial(std::move(rep_), G);
}

void PolynomialLearner::reset_representation() {
  rep_.clear();
  seen_.clear();
}

bool PolynomialLearner::lfd_probe_bound(std::size_t j) const {
  const auto& t = tasks_[j];
  const std::size_t td = static_cast<std::size_t>(opts_.t) * opts_.d;
  return t.data.ledger().max_per_example() <= rep_at_attempt_ + td && t.verify.ledger().max_per_example() <= td;
}

ProbeCounts PolynomialLearner::probes(std::size_t j) const {
  const auto& t = tasks_[j];
  return {t.data.ledger().total() + t.verify.ledger().total(),
          std::max(t.data.ledger().max_per_example(), t.verify.ledger().max_per_example())};
}

}  // namespace lifelong
