#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lifelong/costly_data.hpp"

namespace lifelong {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

enum class NodeKind : std::uint8_t { internal, leaf, empty };

struct TreeNode {
  NodeKind kind = NodeKind::empty;
  Feature var = 0;      // internal only
  bool label = false;   // leaf only; true = "+"
  NodeId left = kNoNode;  // branch taken when the feature is 0
  NodeId right = kNoNode;  // branch taken when the feature is 1
  NodeId parent = kNoNode;
  int depth = 0;
};

// Decision tree whose leaves may be empty. Node 0 is the root.
class IncompleteTree {
 public:
  IncompleteTree();  // a single empty leaf

  static IncompleteTree constant(bool label);
  // Stump on `var`; leaves are empty unless labels are given.
  static IncompleteTree stump(Feature var);
  static IncompleteTree stump(Feature var, bool left_label, bool right_label);

  NodeId root() const { return 0; }
  const TreeNode& node(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }
  bool is_internal(NodeId id) const { return node(id).kind == NodeKind::internal; }
  bool is_leaf(NodeId id) const { return node(id).kind == NodeKind::leaf; }
  bool is_empty(NodeId id) const { return node(id).kind == NodeKind::empty; }
  NodeId child(NodeId id, bool right) const;

  std::size_t size() const;  // internal node count
  int depth() const;         // most internal nodes on any root-to-leaf path
  bool complete() const;     // no empty leaves
  std::vector<NodeId> empty_leaves() const;  // preorder
  std::vector<NodeId> leaves() const;        // preorder, labeled and empty
  std::vector<NodeId> preorder() const;
  std::vector<NodeId> path_to(NodeId id) const;  // root first, id last
  std::vector<bool> directions_to(NodeId id) const;  // true = right
  // Follows the directions from the root; kNoNode when they run past a leaf.
  NodeId follow(const std::vector<bool>& directions) const;
  bool is_ancestor_or_self(NodeId ancestor, NodeId id) const;
  std::vector<Feature> ancestor_vars(NodeId id) const;  // strict ancestors
  std::vector<Feature> variables() const;  // sorted, unique

  IncompleteTree subtree(NodeId id) const;

  // In-place growth used by learners and generators.
  void grow(NodeId u, Feature var);  // empty -> internal with two empty children
  void assign(NodeId u, bool label);  // empty -> leaf
  void relabel(NodeId u, bool label);  // leaf -> leaf
  void clear(NodeId u);  // any node -> empty leaf (subtree dropped from the structure)
  // Copies f under u (which must be empty); returns nothing, f's ids are renumbered.
  void graft(NodeId u, const IncompleteTree& f);

  bool has_repeated_path_variable() const;
  std::string canonical() const;

  friend bool operator==(const IncompleteTree& a, const IncompleteTree& b) {
    return a.canonical() == b.canonical();
  }

 private:
  NodeId add_node(TreeNode n);
  void append_copy(const IncompleteTree& src, NodeId src_id, NodeId dst_id);
  void compact();

  std::vector<TreeNode> nodes_;
};

using DecisionTree = IncompleteTree;

// Functional forms of the construction rules.
IncompleteTree affix(const IncompleteTree& f, NodeId u, const IncompleteTree& f2, bool strict = true);
IncompleteTree label_leaf(const IncompleteTree& f, NodeId u, bool label);

// Superimposes f with its root at w and compares along the w->u path of g.
bool conflict(const IncompleteTree& g, NodeId w, NodeId u, const IncompleteTree& f);
std::optional<Feature> induce(const IncompleteTree& g, NodeId w, NodeId u, const IncompleteTree& f);

// Ordered, duplicate-free list of trees.
class MetafeatureSet {
 public:
  MetafeatureSet() = default;
  explicit MetafeatureSet(std::vector<IncompleteTree> trees);

  bool add(const IncompleteTree& t);  // false when an equal tree is present
  bool contains(const IncompleteTree& t) const;
  std::size_t size() const { return trees_.size(); }
  bool empty() const { return trees_.empty(); }
  const IncompleteTree& operator[](std::size_t k) const { return trees_[k]; }
  const std::vector<IncompleteTree>& trees() const { return trees_; }
  auto begin() const { return trees_.begin(); }
  auto end() const { return trees_.end(); }
  void clear() { trees_.clear(); keys_.clear(); }

 private:
  std::vector<IncompleteTree> trees_;
  std::vector<std::string> keys_;
};

class GainFunction {
 public:
  virtual ~GainFunction() = default;
  // values[k] and labels[k] describe examples[k]; values are feature i on each.
  virtual double gain(std::span<const std::uint32_t> examples, Feature i,
                      std::span<const std::uint8_t> values, const std::vector<bool>& labels) const = 0;
};

double binary_entropy(double p);
double info_gain(std::span<const std::uint8_t> values, const std::vector<bool>& labels);

class InformationGain final : public GainFunction {
 public:
  double gain(std::span<const std::uint32_t> examples, Feature i, std::span<const std::uint8_t> values,
              const std::vector<bool>& labels) const override;
};

// Designates the variable at the deepest target node that every example of S
// reaches. `leaf_of_example[e]` is the target leaf example e is routed to.
class TeacherGain final : public GainFunction {
 public:
  TeacherGain(DecisionTree target, std::vector<NodeId> leaf_of_example);
  double gain(std::span<const std::uint32_t> examples, Feature i, std::span<const std::uint8_t> values,
              const std::vector<bool>& labels) const override;
  NodeId deepest_common_node(std::span<const std::uint32_t> examples,
                             const std::vector<bool>& labels) const;

 private:
  DecisionTree target_;
  std::vector<NodeId> leaf_of_example_;
};

// Leaf reached by a full feature row.
NodeId route(const IncompleteTree& t, std::span<const std::uint8_t> row);
std::vector<NodeId> route_all(const IncompleteTree& t, const std::vector<std::uint8_t>& cells,
                              std::size_t n_features);

template <class ValueOf>
  requires std::invocable<ValueOf&, Feature>
bool predict(const DecisionTree& t, ValueOf&& value_of) {
  NodeId n = t.root();
  while (t.is_internal(n)) n = t.child(n, value_of(t.node(n).var) != 0);
  if (t.is_empty(n)) throw UsageError("prediction reached an empty leaf");
  return t.node(n).label;
}

bool predict(const DecisionTree& t, std::span<const std::uint8_t> row);

struct MembershipCaps {
  int depth_cap = 8;
  std::size_t size_cap = 32;
  std::size_t metafeature_cap = 16;
};

bool member_of_dt(const DecisionTree& g, const MetafeatureSet& F, bool use_prefixes,
                  MembershipCaps caps = {});

nlohmann::json to_json(const IncompleteTree& t);
IncompleteTree tree_from_json(const nlohmann::json& j);

}  // namespace lifelong
