#include "lifelong/tree_lifelong.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>

namespace lifelong {

void TreeProblemParams::validate() const {
  if (N == 0) throw SpecError("N must be positive");
  if (d < 1) throw SpecError("d must be at least 1");
  if (static_cast<std::size_t>(d) > s) throw SpecError("d must not exceed s");
}

namespace {

using CandidateFn = std::function<std::vector<Feature>(const IncompleteTree&, NodeId)>;

struct GrowResult {
  IncompleteTree tree;
  bool ok = true;
  NodeId fail_node = kNoNode;
  TreeFailure reason = TreeFailure::no_candidate;
};

// Top-down growth shared by the scratch learner, LFD and the seen-features baseline.
GrowResult grow_tree(BoolDataset& ds, const GainFunction& gain, const TreeProblemParams& p,
                     const CandidateFn& candidates) {
  GrowResult out;
  IncompleteTree& t = out.tree;
  std::deque<std::pair<NodeId, std::vector<std::uint32_t>>> queue;
  std::vector<std::uint32_t> all(ds.num_examples());
  for (std::uint32_t e = 0; e < all.size(); ++e) all[e] = e;
  queue.emplace_back(t.root(), std::move(all));

  std::vector<bool> labels;
  std::vector<std::uint8_t> values;
  while (!queue.empty()) {
    NodeId u = queue.front().first;
    std::vector<std::uint32_t> S = std::move(queue.front().second);
    queue.pop_front();
    auto fail = [&](TreeFailure why) {
      out.ok = false;
      out.fail_node = u;
      out.reason = why;
    };
    if (t.node(u).depth > p.d) {
      fail(TreeFailure::depth_exceeded);
      return out;
    }
    if (t.size() > p.s) {
      fail(TreeFailure::size_exceeded);
      return out;
    }
    if (S.empty()) {
      t.assign(u, true);
      continue;
    }
    labels.assign(S.size(), false);
    std::size_t positives = 0;
    for (std::size_t k = 0; k < S.size(); ++k) {
      labels[k] = ds.label(S[k]);
      positives += labels[k];
    }
    if (positives == 0 || positives == S.size()) {
      t.assign(u, positives != 0);
      continue;
    }
    std::vector<Feature> I = candidates(t, u);
    if (I.empty()) {
      fail(TreeFailure::no_candidate);
      return out;
    }
    Feature best = I.front();
    double best_gain = -1.0;
    values.resize(S.size());
    for (Feature i : I) {
      for (std::size_t k = 0; k < S.size(); ++k) values[k] = ds.probe(S[k], i);
      double g = gain.gain(S, i, values, labels);
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    t.grow(u, best);
    std::vector<std::uint32_t> left, right;
    for (std::uint32_t e : S) (ds.probe(e, best) ? right : left).push_back(e);
    queue.emplace_back(t.child(u, false), std::move(left));
    queue.emplace_back(t.child(u, true), std::move(right));
  }
  return out;
}

std::vector<Feature> without_ancestors(const IncompleteTree& t, NodeId u, std::vector<Feature> vars) {
  auto anc = t.ancestor_vars(u);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  std::erase_if(vars, [&](Feature v) { return std::find(anc.begin(), anc.end(), v) != anc.end(); });
  return vars;
}

LfdOutcome to_outcome(GrowResult r) {
  if (r.ok) return LfdLearned{std::move(r.tree)};
  LfdFailure f;
  f.failed_path = r.tree.directions_to(r.fail_node);
  f.partial = std::move(r.tree);
  f.reason = r.reason;
  return f;
}

}  // namespace

DecisionTree learn_tree_scratch(BoolDataset& ds, const GainFunction& gain, const TreeProblemParams& p) {
  ds.probe_all();
  std::vector<Feature> every(p.N);
  for (Feature i = 0; i < p.N; ++i) every[i] = i;
  auto r = grow_tree(ds, gain, p, [&](const IncompleteTree& t, NodeId u) { return without_ancestors(t, u, every); });
  if (!r.ok) throw RealizabilityError("no tree within the depth and size bounds fits the data");
  return r.tree;
}

LfdOutcome lfd_tree(BoolDataset& ds, const MetafeatureSet& rep, const GainFunction& gain,
                    const TreeProblemParams& p) {
  auto candidates = [&](const IncompleteTree& t, NodeId u) {
    std::vector<Feature> I;
    auto path = t.path_to(u);
    for (const auto& f : rep)
      for (NodeId w : path)
        if (!conflict(t, w, u, f))
          if (auto v = induce(t, w, u, f)) I.push_back(*v);
    return without_ancestors(t, u, std::move(I));
  };
  return to_outcome(grow_tree(ds, gain, p, candidates));
}

LfdOutcome naive_lfd_seen_features(BoolDataset& ds, const std::set<Feature>& seen, const GainFunction& gain,
                                   const TreeProblemParams& p) {
  std::vector<Feature> pool(seen.begin(), seen.end());
  return to_outcome(
      grow_tree(ds, gain, p, [&](const IncompleteTree& t, NodeId u) { return without_ancestors(t, u, pool); }));
}

bool per_example_probe_bound_check(const ProbeLedger& ledger, std::size_t rep_size, int d) {
  return ledger.max_per_example() <= 2 * rep_size + 2 * static_cast<std::size_t>(d);
}

namespace {

// Does `partial` disagree with g somewhere along these directions?
bool path_diverges(const DecisionTree& g, const LfdFailure& failure, const std::vector<bool>& dirs) {
  const IncompleteTree& h = failure.partial;
  for (std::size_t k = 0; k <= dirs.size(); ++k) {
    std::vector<bool> prefix(dirs.begin(), dirs.begin() + static_cast<std::ptrdiff_t>(k));
    NodeId hn = h.follow(prefix);
    NodeId gn = g.follow(prefix);
    if (hn == kNoNode) return false;
    if (h.is_internal(hn)) {
      if (gn == kNoNode || !g.is_internal(gn) || g.node(gn).var != h.node(hn).var) return true;
    } else if (k == dirs.size() && failure.reason == TreeFailure::no_candidate && gn != kNoNode &&
               g.is_internal(gn)) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::vector<bool> diverging_path(const DecisionTree& g, const LfdFailure& failure) {
  if (path_diverges(g, failure, failure.failed_path)) return failure.failed_path;
  // Shallowest internal node of the partial tree that g does not reach as an internal node.
  const IncompleteTree& h = failure.partial;
  auto order = h.preorder();
  std::stable_sort(order.begin(), order.end(),
                   [&](NodeId a, NodeId b) { return h.node(a).depth < h.node(b).depth; });
  for (NodeId n : order) {
    if (!h.is_internal(n)) continue;
    auto dirs = h.directions_to(n);
    NodeId gn = g.follow(dirs);
    if (gn == kNoNode || !g.is_internal(gn)) return dirs;
  }
  throw InternalConsistencyError("failed partial tree does not diverge from the scratch-learned target");
}

MetafeatureSet improve_rep_tree(MetafeatureSet rep, const DecisionTree& g, const LfdFailure& failure) {
  auto dirs = diverging_path(g, failure);
  NodeId n = g.root();
  for (std::size_t k = 0; k <= dirs.size(); ++k) {
    if (!g.is_internal(n)) break;
    rep.add(g.subtree(n));
    if (k == dirs.size()) break;
    n = g.child(n, dirs[k]);
  }
  return rep;
}

MetafeatureSet improve_rep_anchor(MetafeatureSet rep, const DecisionTree& g, const LfdFailure& failure) {
  auto dirs = diverging_path(g, failure);
  const IncompleteTree& h = failure.partial;
  NodeId gn = g.root();
  NodeId hn = h.root();
  for (std::size_t k = 0; k <= dirs.size(); ++k) {
    if (!g.is_internal(gn)) break;
    if (hn == kNoNode || !h.is_internal(hn) || h.node(hn).var != g.node(gn).var) {
      rep.add(g.subtree(gn));
      return rep;
    }
    if (k == dirs.size()) break;
    gn = g.child(gn, dirs[k]);
    hn = h.child(hn, dirs[k]);
  }
  throw InternalConsistencyError("no node of the failed path conflicts with the partial tree");
}

bool is_decision_list(const IncompleteTree& t) {
  for (NodeId n : t.preorder())
    if (t.is_internal(n) && t.is_internal(t.child(n, false)) && t.is_internal(t.child(n, true))) return false;
  return true;
}

MetafeatureSet improve_rep_list(MetafeatureSet rep, const DecisionTree& g, const IncompleteTree& partial) {
  if (!is_decision_list(g)) throw UsageError("target is not a decision list");
  NodeId gn = g.root();
  NodeId hn = partial.root();
  while (g.is_internal(gn)) {
    if (hn == kNoNode || !partial.is_internal(hn) || partial.node(hn).var != g.node(gn).var) {
      rep.add(g.subtree(gn));
      return rep;
    }
    bool right = g.is_internal(g.child(gn, true));
    if (!right && !g.is_internal(g.child(gn, false))) break;
    gn = g.child(gn, right);
    hn = partial.child(hn, right);
  }
  throw InternalConsistencyError("partial list agrees with the target on every internal node");
}

std::vector<IncompleteTree> cut_at_anchors(const DecisionTree& g, const std::set<Feature>& anchors) {
  if (!g.is_internal(g.root()) || !anchors.contains(g.node(g.root()).var))
    throw ModelViolationError("target root is not an anchor variable");
  std::vector<IncompleteTree> pieces;
  for (NodeId top : g.preorder()) {
    if (!g.is_internal(top) || !anchors.contains(g.node(top).var)) continue;
    IncompleteTree piece;
    std::function<void(NodeId, NodeId)> copy = [&](NodeId src, NodeId dst) {
      const TreeNode& x = g.node(src);
      if (x.kind == NodeKind::leaf) {
        piece.assign(dst, x.label);
      } else if (x.kind == NodeKind::internal && (src == top || !anchors.contains(x.var))) {
        piece.grow(dst, x.var);
        NodeId l = piece.child(dst, false), r = piece.child(dst, true);
        copy(x.left, l);
        copy(x.right, r);
      }
    };
    copy(top, piece.root());
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

MetafeatureSet improve_rep_overcomplete(MetafeatureSet rep, const DecisionTree& g,
                                        const std::set<Feature>& anchors) {
  for (auto& piece : cut_at_anchors(g, anchors)) rep.add(piece);
  return rep;
}

bool consistent_with(const DecisionTree& t, BoolDataset& ds) {
  if (!t.complete()) return false;
  for (std::size_t e = 0; e < ds.num_examples(); ++e)
    if (predict(t, [&](Feature v) { return ds.probe(e, v); }) != ds.label(e)) return false;
  return true;
}

std::size_t bootstrap_count(double p_min, double delta, std::size_t K) {
  if (!(p_min > 0.0 && p_min <= 1.0)) throw SpecError("p_min must lie in (0, 1]");
  if (!(delta > 0.0 && delta < 1.0)) throw SpecError("delta must lie in (0, 1)");
  if (K == 0) throw SpecError("K must be positive");
  double n = std::ceil(std::log(static_cast<double>(K) / delta) / p_min - 1e-12);
  return static_cast<std::size_t>(std::max(1.0, n));
}

BootstrapRun semi_adversarial_bootstrap(std::vector<TreeTask>& stream, double p_min, double delta,
                                        std::size_t K, const TreeProblemParams& p) {
  BootstrapRun run;
  std::size_t n = bootstrap_count(p_min, delta, K);
  for (std::size_t j = 0; j < stream.size(); ++j) {
    TreeTask& task = stream[j];
    TeacherGain teacher = task.teacher();
    if (j < n) {
      run.rep.add(learn_tree_scratch(task.data, teacher, p));
      ++run.scratch_count;
      continue;
    }
    LfdOutcome o = lfd_tree(task.data, run.rep, teacher, p);
    if (!learned(o)) ++run.later_failures;
    run.later_outcomes.push_back(std::move(o));
  }
  return run;
}

}  // namespace lifelong
