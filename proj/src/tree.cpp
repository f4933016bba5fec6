#include "lifelong/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

namespace lifelong {

IncompleteTree::IncompleteTree() { nodes_.push_back(TreeNode{}); }

IncompleteTree IncompleteTree::constant(bool label) {
  IncompleteTree t;
  t.assign(0, label);
  return t;
}

IncompleteTree IncompleteTree::stump(Feature var) {
  IncompleteTree t;
  t.grow(0, var);
  return t;
}

IncompleteTree IncompleteTree::stump(Feature var, bool left_label, bool right_label) {
  IncompleteTree t = stump(var);
  t.assign(t.child(0, false), left_label);
  t.assign(t.child(0, true), right_label);
  return t;
}

const TreeNode& IncompleteTree::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) throw UsageError("node id out of range");
  return nodes_[static_cast<std::size_t>(id)];
}

NodeId IncompleteTree::child(NodeId id, bool right) const {
  const TreeNode& n = node(id);
  if (n.kind != NodeKind::internal) throw UsageError("child of a non-internal node");
  return right ? n.right : n.left;
}

std::vector<NodeId> IncompleteTree::preorder() const {
  std::vector<NodeId> out;
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    out.push_back(n);
    if (nodes_[n].kind == NodeKind::internal) {
      stack.push_back(nodes_[n].right);
      stack.push_back(nodes_[n].left);
    }
  }
  return out;
}

std::size_t IncompleteTree::size() const {
  std::size_t s = 0;
  for (NodeId n : preorder())
    if (nodes_[n].kind == NodeKind::internal) ++s;
  return s;
}

int IncompleteTree::depth() const {
  int d = 0;
  for (NodeId n : preorder())
    if (nodes_[n].kind != NodeKind::internal) d = std::max(d, nodes_[n].depth);
  return d;
}

bool IncompleteTree::complete() const { return empty_leaves().empty(); }

std::vector<NodeId> IncompleteTree::empty_leaves() const {
  std::vector<NodeId> out;
  for (NodeId n : preorder())
    if (nodes_[n].kind == NodeKind::empty) out.push_back(n);
  return out;
}

std::vector<NodeId> IncompleteTree::leaves() const {
  std::vector<NodeId> out;
  for (NodeId n : preorder())
    if (nodes_[n].kind != NodeKind::internal) out.push_back(n);
  return out;
}

std::vector<NodeId> IncompleteTree::path_to(NodeId id) const {
  node(id);
  std::vector<NodeId> out;
  for (NodeId n = id; n != kNoNode; n = nodes_[n].parent) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<bool> IncompleteTree::directions_to(NodeId id) const {
  auto path = path_to(id);
  std::vector<bool> dirs;
  for (std::size_t k = 1; k < path.size(); ++k) dirs.push_back(nodes_[path[k - 1]].right == path[k]);
  return dirs;
}

NodeId IncompleteTree::follow(const std::vector<bool>& directions) const {
  NodeId n = 0;
  for (bool right : directions) {
    if (nodes_[n].kind != NodeKind::internal) return kNoNode;
    n = right ? nodes_[n].right : nodes_[n].left;
  }
  return n;
}

bool IncompleteTree::is_ancestor_or_self(NodeId ancestor, NodeId id) const {
  node(ancestor);
  for (NodeId n = id; n != kNoNode; n = node(n).parent)
    if (n == ancestor) return true;
  return false;
}

std::vector<Feature> IncompleteTree::ancestor_vars(NodeId id) const {
  std::vector<Feature> out;
  for (NodeId n = node(id).parent; n != kNoNode; n = nodes_[n].parent) out.push_back(nodes_[n].var);
  return out;
}

std::vector<Feature> IncompleteTree::variables() const {
  std::set<Feature> vars;
  for (NodeId n : preorder())
    if (nodes_[n].kind == NodeKind::internal) vars.insert(nodes_[n].var);
  return {vars.begin(), vars.end()};
}

NodeId IncompleteTree::add_node(TreeNode n) {
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

void IncompleteTree::append_copy(const IncompleteTree& src, NodeId src_id, NodeId dst_id) {
  const TreeNode& s = src.nodes_[src_id];
  nodes_[dst_id].kind = s.kind;
  nodes_[dst_id].var = s.var;
  nodes_[dst_id].label = s.label;
  if (s.kind != NodeKind::internal) return;
  int d = nodes_[dst_id].depth + 1;
  NodeId l = add_node(TreeNode{NodeKind::empty, 0, false, kNoNode, kNoNode, dst_id, d});
  NodeId r = add_node(TreeNode{NodeKind::empty, 0, false, kNoNode, kNoNode, dst_id, d});
  nodes_[dst_id].left = l;
  nodes_[dst_id].right = r;
  append_copy(src, s.left, l);
  append_copy(src, s.right, r);
}

IncompleteTree IncompleteTree::subtree(NodeId id) const {
  node(id);
  IncompleteTree t;
  t.append_copy(*this, id, 0);
  return t;
}

void IncompleteTree::grow(NodeId u, Feature var) {
  if (node(u).kind != NodeKind::empty) throw UsageError("can only split an empty leaf");
  int d = nodes_[u].depth + 1;
  NodeId l = add_node(TreeNode{NodeKind::empty, 0, false, kNoNode, kNoNode, u, d});
  NodeId r = add_node(TreeNode{NodeKind::empty, 0, false, kNoNode, kNoNode, u, d});
  nodes_[u].kind = NodeKind::internal;
  nodes_[u].var = var;
  nodes_[u].left = l;
  nodes_[u].right = r;
}

void IncompleteTree::assign(NodeId u, bool label) {
  if (node(u).kind != NodeKind::empty) throw UsageError("can only label an empty leaf");
  nodes_[u].kind = NodeKind::leaf;
  nodes_[u].label = label;
}

void IncompleteTree::relabel(NodeId u, bool label) {
  if (node(u).kind != NodeKind::leaf) throw UsageError("relabel needs a labeled leaf");
  nodes_[u].label = label;
}

void IncompleteTree::clear(NodeId u) {
  node(u);
  nodes_[u].kind = NodeKind::empty;
  nodes_[u].left = nodes_[u].right = kNoNode;
  compact();
}

void IncompleteTree::compact() {
  IncompleteTree t;
  t.append_copy(*this, 0, 0);
  nodes_ = std::move(t.nodes_);
}

void IncompleteTree::graft(NodeId u, const IncompleteTree& f) {
  if (node(u).kind != NodeKind::empty) throw UsageError("affix target is not an empty leaf");
  append_copy(f, 0, u);
}

bool IncompleteTree::has_repeated_path_variable() const {
  for (NodeId n : preorder()) {
    if (nodes_[n].kind != NodeKind::internal) continue;
    for (Feature a : ancestor_vars(n))
      if (a == nodes_[n].var) return true;
  }
  return false;
}

std::string IncompleteTree::canonical() const {
  std::string out;
  std::function<void(NodeId)> rec = [&](NodeId n) {
    const TreeNode& x = nodes_[n];
    switch (x.kind) {
      case NodeKind::empty: out += '_'; break;
      case NodeKind::leaf: out += x.label ? '+' : '-'; break;
      case NodeKind::internal:
        out += std::to_string(x.var);
        out += '(';
        rec(x.left);
        out += ',';
        rec(x.right);
        out += ')';
        break;
    }
  };
  rec(0);
  return out;
}

IncompleteTree affix(const IncompleteTree& f, NodeId u, const IncompleteTree& f2, bool strict) {
  IncompleteTree out = f;
  out.graft(u, f2);
  if (strict && out.has_repeated_path_variable())
    throw IllegalTreeError("affix repeats a variable on a root-to-leaf path");
  return out;
}

IncompleteTree label_leaf(const IncompleteTree& f, NodeId u, bool label) {
  IncompleteTree out = f;
  out.assign(u, label);
  return out;
}

namespace {

struct Superimposition {
  bool conflict = false;
  std::optional<Feature> induced;
};

Superimposition superimpose(const IncompleteTree& g, NodeId w, NodeId u, const IncompleteTree& f) {
  if (!g.is_ancestor_or_self(w, u)) throw UsageError("u is not in the subtree of w");
  Superimposition out;
  auto full = g.path_to(u);
  auto start = std::find(full.begin(), full.end(), w);
  std::vector<NodeId> path(start, full.end());
  NodeId fn = f.root();
  for (std::size_t k = 0; k < path.size(); ++k) {
    NodeId gn = path[k];
    bool last = k + 1 == path.size();
    if (w != u && g.is_internal(gn) && f.is_internal(fn) && g.node(gn).var != f.node(fn).var)
      out.conflict = true;
    if (last) {
      if (f.is_internal(fn)) out.induced = f.node(fn).var;
      break;
    }
    if (!f.is_internal(fn)) break;  // f ends before u
    fn = f.child(fn, g.node(gn).right == path[k + 1]);
  }
  return out;
}

}  // namespace

bool conflict(const IncompleteTree& g, NodeId w, NodeId u, const IncompleteTree& f) {
  return superimpose(g, w, u, f).conflict;
}

std::optional<Feature> induce(const IncompleteTree& g, NodeId w, NodeId u, const IncompleteTree& f) {
  return superimpose(g, w, u, f).induced;
}

MetafeatureSet::MetafeatureSet(std::vector<IncompleteTree> trees) {
  for (auto& t : trees) add(t);
}

bool MetafeatureSet::add(const IncompleteTree& t) {
  std::string key = t.canonical();
  if (std::find(keys_.begin(), keys_.end(), key) != keys_.end()) return false;
  keys_.push_back(std::move(key));
  trees_.push_back(t);
  return true;
}

bool MetafeatureSet::contains(const IncompleteTree& t) const {
  return std::find(keys_.begin(), keys_.end(), t.canonical()) != keys_.end();
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return p * std::log2(1.0 / p) + (1.0 - p) * std::log2(1.0 / (1.0 - p));
}

double info_gain(std::span<const std::uint8_t> values, const std::vector<bool>& labels) {
  if (values.size() != labels.size()) throw UsageError("values and labels differ in length");
  std::size_t n = labels.size();
  if (n == 0) return 0.0;
  std::size_t pos = 0, n1 = 0, pos1 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    pos += labels[k];
    if (values[k]) {
      ++n1;
      pos1 += labels[k];
    }
  }
  std::size_t n0 = n - n1, pos0 = pos - pos1;
  double total = binary_entropy(static_cast<double>(pos) / n);
  double split = 0.0;
  if (n0) split += static_cast<double>(n0) / n * binary_entropy(static_cast<double>(pos0) / n0);
  if (n1) split += static_cast<double>(n1) / n * binary_entropy(static_cast<double>(pos1) / n1);
  return std::max(0.0, total - split);
}

double InformationGain::gain(std::span<const std::uint32_t>, Feature, std::span<const std::uint8_t> values,
                             const std::vector<bool>& labels) const {
  return info_gain(values, labels);
}

TeacherGain::TeacherGain(DecisionTree target, std::vector<NodeId> leaf_of_example)
    : target_(std::move(target)), leaf_of_example_(std::move(leaf_of_example)) {
  for (NodeId l : leaf_of_example_)
    if (!target_.is_leaf(l)) throw OracleMisuseError("teacher route does not end at a labeled leaf");
}

NodeId TeacherGain::deepest_common_node(std::span<const std::uint32_t> examples,
                                        const std::vector<bool>& labels) const {
  if (examples.empty()) return target_.root();
  NodeId common = kNoNode;
  for (std::size_t k = 0; k < examples.size(); ++k) {
    if (examples[k] >= leaf_of_example_.size()) throw OracleMisuseError("example unknown to the teacher");
    NodeId leaf = leaf_of_example_[examples[k]];
    if (k < labels.size() && target_.node(leaf).label != labels[k])
      throw OracleMisuseError("sample is inconsistent with the teacher's target");
    if (common == kNoNode) {
      common = leaf;
      continue;
    }
    NodeId a = common, b = leaf;
    while (target_.node(a).depth > target_.node(b).depth) a = target_.node(a).parent;
    while (target_.node(b).depth > target_.node(a).depth) b = target_.node(b).parent;
    while (a != b) {
      a = target_.node(a).parent;
      b = target_.node(b).parent;
    }
    common = a;
  }
  return common;
}

double TeacherGain::gain(std::span<const std::uint32_t> examples, Feature i, std::span<const std::uint8_t>,
                         const std::vector<bool>& labels) const {
  NodeId n = deepest_common_node(examples, labels);
  return target_.is_internal(n) && target_.node(n).var == i ? 1.0 : 0.0;
}

NodeId route(const IncompleteTree& t, std::span<const std::uint8_t> row) {
  NodeId n = t.root();
  while (t.is_internal(n)) n = t.child(n, row[t.node(n).var] != 0);
  return n;
}

std::vector<NodeId> route_all(const IncompleteTree& t, const std::vector<std::uint8_t>& cells,
                              std::size_t n_features) {
  std::vector<NodeId> out;
  for (std::size_t off = 0; off + n_features <= cells.size(); off += n_features)
    out.push_back(route(t, std::span<const std::uint8_t>(cells.data() + off, n_features)));
  return out;
}

bool predict(const DecisionTree& t, std::span<const std::uint8_t> row) {
  return predict(t, [&](Feature v) { return row[v]; });
}

namespace {

class MembershipSearch {
 public:
  MembershipSearch(const DecisionTree& g, const MetafeatureSet& F, bool prefixes)
      : g_(g), F_(F), prefixes_(prefixes) {}

  // Can the subtree of g at p be produced by affixing some f at p and growing?
  bool grow(NodeId p) {
    auto it = grow_memo_.find(p);
    if (it != grow_memo_.end()) return it->second;
    bool ok = false;
    for (std::size_t k = 0; k < F_.size() && !ok; ++k) ok = match(k, F_[k].root(), p);
    grow_memo_[p] = ok;
    return ok;
  }

 private:
  // f node fn lies over g node p.
  bool match(std::size_t k, NodeId fn, NodeId p) {
    auto key = std::make_tuple(k, fn, p);
    auto it = match_memo_.find(key);
    if (it != match_memo_.end()) return it->second;
    const IncompleteTree& f = F_[k];
    bool ok = false;
    bool cut_allowed = prefixes_ && fn != f.root();
    auto filled_later = [&] { return g_.is_leaf(p) || grow(p); };
    if (f.is_empty(fn)) {
      ok = filled_later();
    } else if (f.is_leaf(fn)) {
      ok = (g_.is_leaf(p) && g_.node(p).label == f.node(fn).label) || (cut_allowed && filled_later());
    } else {
      if (g_.is_internal(p) && g_.node(p).var == f.node(fn).var)
        ok = match(k, f.child(fn, false), g_.child(p, false)) && match(k, f.child(fn, true), g_.child(p, true));
      if (!ok && cut_allowed) ok = filled_later();
    }
    match_memo_[key] = ok;
    return ok;
  }

  const DecisionTree& g_;
  const MetafeatureSet& F_;
  bool prefixes_;
  std::map<NodeId, bool> grow_memo_;
  std::map<std::tuple<std::size_t, NodeId, NodeId>, bool> match_memo_;
};

}  // namespace

bool member_of_dt(const DecisionTree& g, const MetafeatureSet& F, bool use_prefixes, MembershipCaps caps) {
  if (!g.complete()) throw UsageError("membership is defined for complete trees");
  if (g.depth() > caps.depth_cap || g.size() > caps.size_cap || F.size() > caps.metafeature_cap)
    throw OracleTooLargeError("instance exceeds the membership oracle caps");
  // labeling the initial empty leaf is itself an affix/label sequence
  if (g.is_leaf(g.root())) return true;
  MembershipSearch search(g, F, use_prefixes);
  return search.grow(g.root());
}

nlohmann::json to_json(const IncompleteTree& t) {
  std::function<nlohmann::json(NodeId)> rec = [&](NodeId n) -> nlohmann::json {
    const TreeNode& x = t.node(n);
    switch (x.kind) {
      case NodeKind::empty: return {{"empty", true}};
      case NodeKind::leaf: return {{"leaf", x.label ? "+" : "-"}};
      case NodeKind::internal: break;
    }
    return {{"var", x.var}, {"left", rec(x.left)}, {"right", rec(x.right)}};
  };
  return rec(t.root());
}

IncompleteTree tree_from_json(const nlohmann::json& j) {
  IncompleteTree t;
  std::function<void(const nlohmann::json&, NodeId)> rec = [&](const nlohmann::json& x, NodeId n) {
    if (!x.is_object()) throw UsageError("tree node must be a JSON object");
    if (x.contains("empty")) return;
    if (x.contains("leaf")) {
      std::string l = x.at("leaf").get<std::string>();
      if (l != "+" && l != "-") throw UsageError("leaf label must be \"+\" or \"-\"");
      t.assign(n, l == "+");
      return;
    }
    if (!x.contains("var") || !x.contains("left") || !x.contains("right"))
      throw UsageError("internal node needs var, left and right");
    t.grow(n, x.at("var").get<Feature>());
    NodeId l = t.child(n, false), r = t.child(n, true);
    rec(x.at("left"), l);
    rec(x.at("right"), r);
  };
  rec(j, t.root());
  if (t.has_repeated_path_variable()) throw IllegalTreeError("tree repeats a variable on a path");
  return t;
}

}  // namespace lifelong
