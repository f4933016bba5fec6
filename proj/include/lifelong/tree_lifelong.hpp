#pragma once

#include <cstddef>
#include <memory>
#include <set>
#include <variant>
#include <vector>

#include "lifelong/costly_data.hpp"
#include "lifelong/tree.hpp"

namespace lifelong {

struct TreeProblemParams {
  std::size_t N = 0;
  int d = 1;
  std::size_t s = 1;  // internal-node budget
  std::size_t K = 0;  // stream checks only

  void validate() const;
};

enum class TreeFailure { depth_exceeded, size_exceeded, no_candidate };

struct LfdFailure {
  IncompleteTree partial;
  std::vector<bool> failed_path;  // root-to-node directions in `partial`, true = right
  TreeFailure reason = TreeFailure::no_candidate;
};

struct LfdLearned {
  DecisionTree tree;
};

using LfdOutcome = std::variant<LfdLearned, LfdFailure>;

inline bool learned(const LfdOutcome& o) { return std::holds_alternative<LfdLearned>(o); }

DecisionTree learn_tree_scratch(BoolDataset& ds, const GainFunction& gain, const TreeProblemParams& p);

LfdOutcome lfd_tree(BoolDataset& ds, const MetafeatureSet& rep, const GainFunction& gain,
                    const TreeProblemParams& p);

LfdOutcome naive_lfd_seen_features(BoolDataset& ds, const std::set<Feature>& seen, const GainFunction& gain,
                                   const TreeProblemParams& p);

bool per_example_probe_bound_check(const ProbeLedger& ledger, std::size_t rep_size, int d);

// The root-path of `failure.partial` that ImproveRep replays on g.
std::vector<bool> diverging_path(const DecisionTree& g, const LfdFailure& failure);

MetafeatureSet improve_rep_tree(MetafeatureSet rep, const DecisionTree& g, const LfdFailure& failure);
MetafeatureSet improve_rep_list(MetafeatureSet rep, const DecisionTree& g, const IncompleteTree& partial);
MetafeatureSet improve_rep_anchor(MetafeatureSet rep, const DecisionTree& g, const LfdFailure& failure);
MetafeatureSet improve_rep_overcomplete(MetafeatureSet rep, const DecisionTree& g,
                                        const std::set<Feature>& anchors);

bool is_decision_list(const IncompleteTree& t);
// Pieces of g cut at every anchor occurrence; the cut points become empty leaves.
std::vector<IncompleteTree> cut_at_anchors(const DecisionTree& g, const std::set<Feature>& anchors);

// Every example is classified correctly by t. Uses probe(); for a hypothesis
// built from the same dataset this reads only cells already in the ledger.
bool consistent_with(const DecisionTree& t, BoolDataset& ds);

// A tree-family task: data plus the hidden target and its routing (teacher only).
struct TreeTask {
  BoolDataset data;
  DecisionTree target;
  std::vector<NodeId> target_leaf;
  bool good = true;

  TeacherGain teacher() const { return TeacherGain(target, target_leaf); }
};

std::size_t bootstrap_count(double p_min, double delta, std::size_t K);

struct BootstrapRun {
  MetafeatureSet rep;
  std::size_t scratch_count = 0;
  std::size_t later_failures = 0;
  std::vector<LfdOutcome> later_outcomes;
};

// Learns the first bootstrap_count targets from scratch and keeps each whole;
// later tasks run lfd_tree only.
BootstrapRun semi_adversarial_bootstrap(std::vector<TreeTask>& stream, double p_min, double delta,
                                        std::size_t K, const TreeProblemParams& p);

}  // namespace lifelong
