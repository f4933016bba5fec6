#include "lifelong/streams.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace lifelong {

namespace {

constexpr int kMaxAttempts = 200;

const std::map<std::string, Family>& family_names() {
  static const std::map<std::string, Family> names = {
      {"Trees", Family::trees},
      {"Lists", Family::lists},
      {"AnchorTrees", Family::anchor_trees},
      {"OvercompleteTrees", Family::overcomplete_trees},
      {"SemiAdversarialTrees", Family::semi_adversarial_trees},
      {"Monomials", Family::monomials},
      {"Polynomials", Family::polynomials},
  };
  return names;
}

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::vector<Feature> all_features(std::size_t N) {
  std::vector<Feature> v(N);
  std::iota(v.begin(), v.end(), Feature{0});
  return v;
}

std::vector<Feature> minus(const std::vector<Feature>& pool, const std::vector<Feature>& drop) {
  std::vector<Feature> out;
  for (Feature v : pool)
    if (std::find(drop.begin(), drop.end(), v) == drop.end()) out.push_back(v);
  return out;
}

// Random incomplete tree. The root is always split (on `root_var` when given);
// deeper nodes split with probability 1/2. Leaves are empty with probability
// `empty_prob`, otherwise labeled. Cherries of two labeled leaves get opposite
// labels and at least one leaf is left empty, so every composition can be
// labeled into a reduced tree.
IncompleteTree random_metafeature(std::optional<Feature> root_var, const std::vector<Feature>& pool, int max_depth,
                                  std::size_t max_size, std::mt19937_64& rng, double empty_prob = 0.5) {
  IncompleteTree t;
  std::vector<NodeId> work{t.root()};
  while (!work.empty()) {
    NodeId u = work.back();
    work.pop_back();
    bool is_root = u == t.root();
    auto avail = minus(pool, t.ancestor_vars(u));
    if (root_var) std::erase(avail, *root_var);
    bool split = is_root || (t.node(u).depth < max_depth && t.size() < max_size && !avail.empty() && coin(rng));
    if (split) {
      Feature v = (is_root && root_var) ? *root_var : pick(avail, rng);
      t.grow(u, v);
      work.push_back(t.child(u, true));
      work.push_back(t.child(u, false));
    } else if (!coin(rng, empty_prob)) {
      t.assign(u, coin(rng));
    }
  }
  for (NodeId n : t.preorder()) {
    if (!t.is_internal(n)) continue;
    NodeId l = t.child(n, false), r = t.child(n, true);
    if (t.is_leaf(l) && t.is_leaf(r) && t.node(l).label == t.node(r).label) t.relabel(r, !t.node(r).label);
  }
  if (t.complete()) {
    auto leaves = t.leaves();
    NodeId u = pick(leaves, rng);
    t.clear(u);
  }
  return t;
}

// Decision list with `length` nodes over distinct variables; each node has one
// labeled leaf and the tail is empty.
IncompleteTree random_list_metafeature(const std::vector<Feature>& pool, int length, std::mt19937_64& rng) {
  IncompleteTree t;
  NodeId u = t.root();
  std::vector<Feature> vars = pool;
  std::shuffle(vars.begin(), vars.end(), rng);
  for (int k = 0; k < length; ++k) {
    t.grow(u, vars[static_cast<std::size_t>(k)]);
    bool leaf_right = coin(rng);
    t.assign(t.child(u, leaf_right), coin(rng));
    u = t.child(u, !leaf_right);
  }
  return t;
}

std::size_t roots_above(const IncompleteTree& g, const std::vector<NodeId>& roots, NodeId u) {
  std::size_t c = 0;
  for (NodeId r : roots)
    if (g.is_ancestor_or_self(r, u)) ++c;
  return c;
}

bool vars_clash(const IncompleteTree& g, NodeId u, const IncompleteTree& f) {
  auto anc = g.ancestor_vars(u);
  for (Feature v : f.variables())
    if (std::find(anc.begin(), anc.end(), v) != anc.end()) return true;
  return false;
}

// Composes a target from `F`: starts from F[first] and affixes compatible
// metafeatures at empty leaves with probability 1/2 each, then labels.
DecisionTree compose(const std::vector<IncompleteTree>& F, std::size_t first, int d, std::size_t s,
                     std::size_t per_path_cap, std::mt19937_64& rng) {
  IncompleteTree g = F[first];
  std::vector<NodeId> roots{g.root()};
  std::vector<NodeId> work = g.empty_leaves();
  std::reverse(work.begin(), work.end());
  while (!work.empty()) {
    NodeId u = work.back();
    work.pop_back();
    if (!coin(rng)) continue;
    std::vector<std::size_t> ok;
    for (std::size_t k = 0; k < F.size(); ++k) {
      const auto& f = F[k];
      if (g.node(u).depth + f.depth() > d) continue;
      if (g.size() + f.size() > s) continue;
      if (roots_above(g, roots, u) + 1 > per_path_cap) continue;
      if (vars_clash(g, u, f)) continue;
      ok.push_back(k);
    }
    if (ok.empty()) continue;
    std::size_t before = g.node_count();
    g.graft(u, F[pick(ok, rng)]);
    roots.push_back(u);
    for (std::size_t n = g.node_count(); n-- > before;)
      if (g.is_empty(static_cast<NodeId>(n))) work.push_back(static_cast<NodeId>(n));
    if (g.is_empty(u)) work.push_back(u);
  }
  fill_reduced_labels(g, rng);
  return g;
}

DecisionTree compose_list(const std::vector<IncompleteTree>& F, std::size_t first, int d, std::mt19937_64& rng) {
  IncompleteTree g = F[first];
  while (coin(rng)) {
    auto empties = g.empty_leaves();
    NodeId tail = empties.front();
    std::vector<std::size_t> ok;
    for (std::size_t k = 0; k < F.size(); ++k)
      if (g.node(tail).depth + F[k].depth() <= d && !vars_clash(g, tail, F[k])) ok.push_back(k);
    if (ok.empty()) break;
    g.graft(tail, F[pick(ok, rng)]);
  }
  fill_reduced_labels(g, rng);
  return g;
}

std::vector<IncompleteTree> distinct_metafeatures(std::size_t count,
                                                  const std::function<IncompleteTree(std::size_t)>& make) {
  MetafeatureSet seen;
  std::vector<IncompleteTree> out;
  for (std::size_t k = 0; k < count; ++k) {
    int tries = 0;
    for (;;) {
      IncompleteTree f = make(k);
      if (seen.add(f)) {
        out.push_back(std::move(f));
        break;
      }
      if (++tries >= kMaxAttempts) throw GeneratorExhaustedError("could not draw distinct metafeatures");
    }
  }
  return out;
}

// Overcomplete variant: same shape, labels and root; inner variables redrawn.
IncompleteTree revariate(const IncompleteTree& base, const std::vector<Feature>& pool, std::mt19937_64& rng) {
  IncompleteTree t;
  std::function<void(NodeId, NodeId)> copy = [&](NodeId src, NodeId dst) {
    const TreeNode& n = base.node(src);
    if (n.kind == NodeKind::leaf) {
      t.assign(dst, n.label);
    } else if (n.kind == NodeKind::internal) {
      Feature v = n.var;
      if (src != base.root()) {
        auto avail = minus(pool, t.ancestor_vars(dst));
        if (avail.empty()) throw GeneratorExhaustedError("variable pool too small for a variant");
        v = pick(avail, rng);
      }
      t.grow(dst, v);
      copy(n.left, t.child(dst, false));
      copy(n.right, t.child(dst, true));
    }
  };
  copy(base.root(), t.root());
  return t;
}

struct TreeModel {
  std::vector<IncompleteTree> F;
  std::vector<std::vector<std::size_t>> groups;  // topmost draw: group, then member
  std::set<Feature> anchors;
};

TreeModel draw_tree_model(const StreamSpec& spec, std::mt19937_64& rng) {
  TreeModel model;
  const int mfd = spec.metafeature_depth;
  const auto every = all_features(spec.N);
  switch (spec.family) {
    case Family::trees:
    case Family::semi_adversarial_trees:
      model.F = distinct_metafeatures(
          spec.K, [&](std::size_t) { return random_metafeature(std::nullopt, every, mfd, spec.s, rng); });
      break;
    case Family::lists:
      model.F = distinct_metafeatures(spec.K, [&](std::size_t) {
        int len = std::uniform_int_distribution<int>(1, mfd)(rng);
        return random_list_metafeature(every, len, rng);
      });
      break;
    case Family::anchor_trees: {
      auto shuffled = every;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::vector<Feature> anchors(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(spec.K));
      auto inner = minus(every, anchors);
      model.anchors = {anchors.begin(), anchors.end()};
      model.F = distinct_metafeatures(
          spec.K, [&](std::size_t k) { return random_metafeature(anchors[k], inner, mfd, spec.s, rng); });
      break;
    }
    case Family::overcomplete_trees: {
      auto shuffled = every;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      std::vector<Feature> anchors(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(spec.K2));
      auto inner = minus(every, anchors);
      model.anchors = {anchors.begin(), anchors.end()};
      for (std::size_t k = 0; k < spec.K2; ++k) {
        IncompleteTree base = random_metafeature(anchors[k], inner, mfd, spec.s, rng);
        MetafeatureSet group;
        group.add(base);
        for (std::size_t tries = 0; group.size() < spec.K1 && tries < 10 * spec.K1; ++tries)
          group.add(revariate(base, inner, rng));
        std::vector<std::size_t> ids;
        for (const auto& f : group) {
          ids.push_back(model.F.size());
          model.F.push_back(f);
        }
        model.groups.push_back(std::move(ids));
      }
      break;
    }
    default:
      throw UsageError("not a tree family");
  }
  if (model.groups.empty())
    for (std::size_t k = 0; k < model.F.size(); ++k) model.groups.push_back({k});
  return model;
}

DecisionTree draw_tree_target(const TreeModel& model, const StreamSpec& spec, std::mt19937_64& rng) {
  const auto& group = pick(model.groups, rng);
  std::size_t first = pick(group, rng);
  if (spec.family == Family::lists) return compose_list(model.F, first, spec.d, rng);
  std::size_t cap = spec.family == Family::overcomplete_trees ? spec.t : std::numeric_limits<std::size_t>::max();
  return compose(model.F, first, spec.d, spec.s, cap, rng);
}

std::vector<Feature> tree_model_vars(const TreeModel& model) {
  std::set<Feature> vars;
  for (const auto& f : model.F)
    for (Feature v : f.variables()) vars.insert(v);
  return {vars.begin(), vars.end()};
}

DecisionTree random_list(const std::vector<Feature>& pool, int max_depth, std::mt19937_64& rng) {
  int len = std::uniform_int_distribution<int>(1, std::min<int>(max_depth, static_cast<int>(pool.size())))(rng);
  IncompleteTree t = random_list_metafeature(pool, len, rng);
  fill_reduced_labels(t, rng);
  return t;
}

// Monomial model: K natural columns of rank K with degree at most max(1, d/2).
std::vector<Monomial> draw_monomial_columns(const StreamSpec& spec, std::mt19937_64& rng) {
  const unsigned col_deg = std::max(1u, static_cast<unsigned>(spec.d) / 2);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Monomial> cols;
    for (std::size_t k = 0; k < spec.K; ++k) {
      Monomial g(spec.N);
      unsigned deg = std::uniform_int_distribution<unsigned>(1, col_deg)(rng);
      for (unsigned u = 0; u < deg; ++u)
        ++g.exponents[std::uniform_int_distribution<std::size_t>(0, spec.N - 1)(rng)];
      cols.push_back(std::move(g));
    }
    std::vector<std::vector<Rational>> as_rational;
    for (const auto& c : cols) as_rational.emplace_back(c.exponents.begin(), c.exponents.end());
    if (exact_rank(as_rational) == spec.K) return cols;
  }
  throw GeneratorExhaustedError("could not draw a full-rank monomial basis");
}

// A natural combination of the columns with total degree in [1, d].
Monomial draw_combination(const std::vector<Monomial>& F, unsigned d, std::mt19937_64& rng) {
  const std::size_t n = F.front().size();
  Monomial g(n);
  unsigned deg = 0;
  bool first = true;
  while (first || coin(rng)) {
    std::vector<std::size_t> ok;
    for (std::size_t k = 0; k < F.size(); ++k)
      if (deg + F[k].degree() <= d) ok.push_back(k);
    if (ok.empty()) break;
    const Monomial& f = F[pick(ok, rng)];
    for (std::size_t i = 0; i < n; ++i) g.exponents[i] += f.exponents[i];
    deg += f.degree();
    first = false;
  }
  if (deg == 0) throw GeneratorExhaustedError("no column fits the degree budget");
  return g;
}

Rational draw_coefficient(std::mt19937_64& rng) {
  static const int dens[] = {1, 2, 4};
  Rational a(std::uniform_int_distribution<int>(1, 8)(rng), dens[std::uniform_int_distribution<int>(0, 2)(rng)]);
  a.canonicalize();
  return coin(rng) ? a : Rational(-a);
}

Polynomial draw_polynomial(const std::vector<Monomial>& F, unsigned d, unsigned t, std::mt19937_64& rng) {
  const std::size_t n = F.front().size();
  unsigned terms = std::uniform_int_distribution<unsigned>(1, t)(rng);
  std::set<Monomial> chosen;
  for (int tries = 0; chosen.size() < terms && tries < kMaxAttempts; ++tries) chosen.insert(draw_combination(F, d, rng));
  Polynomial p(n);
  for (const auto& g : chosen) p.add_term(g, draw_coefficient(rng));
  return p;
}

std::vector<Feature> monomial_free_features(const std::vector<Monomial>& F, std::size_t N) {
  std::set<Feature> used;
  for (const auto& f : F)
    for (Feature i : f.support()) used.insert(i);
  std::vector<Feature> free;
  for (Feature i = 0; i < N; ++i)
    if (!used.contains(i)) free.push_back(i);
  return free;
}

Monomial draw_free_monomial(const std::vector<Feature>& free, std::size_t N, unsigned d, std::mt19937_64& rng) {
  Monomial g(N);
  unsigned deg = std::uniform_int_distribution<unsigned>(1, d)(rng);
  for (unsigned u = 0; u < deg; ++u) ++g.exponents[pick(free, rng)];
  return g;
}

MonomialTask make_monomial_task(const Monomial& g, const StreamSpec& spec, const ProductDistribution& dist,
                                std::mt19937_64& rng, bool good) {
  auto label = [&](std::span<const std::uint64_t> row, std::uint64_t den) { return evaluate_on_grid(g, row, den); };
  GridDataset data = make_grid_dataset(spec.N, spec.S, dist, label, rng);
  GridDataset verify = make_grid_dataset(spec.N, 1, dist, label, rng);
  return MonomialTask{std::move(data), std::move(verify), g, good};
}

PolynomialTask make_poly_task(const Polynomial& p, const StreamSpec& spec, const ProductDistribution& dist,
                              std::mt19937_64& rng, bool good) {
  auto label = [&](std::span<const std::uint64_t> row, std::uint64_t den) { return p.evaluate_on_grid(row, den); };
  GridDataset data = make_grid_dataset(spec.N, spec.S, dist, label, rng);
  GridDataset verify = make_grid_dataset(spec.N, 1, dist, label, rng);
  return PolynomialTask{std::move(data), std::move(verify), p, good};
}

}  // namespace

std::string to_string(Family f) {
  for (const auto& [name, fam] : family_names())
    if (fam == f) return name;
  return "?";
}

Family family_from_string(const std::string& s) {
  auto it = family_names().find(s);
  if (it == family_names().end()) throw SpecError("unknown family: " + s);
  return it->second;
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::random: return "random";
    case Placement::adversarial_first: return "adversarial-first";
    case Placement::adversarial_interleaved: return "adversarial-interleaved";
  }
  return "?";
}

Placement placement_from_string(const std::string& s) {
  if (s == "random") return Placement::random;
  if (s == "adversarial-first") return Placement::adversarial_first;
  if (s == "adversarial-interleaved") return Placement::adversarial_interleaved;
  throw SpecError("unknown placement: " + s);
}

bool is_tree_family(Family f) { return f != Family::monomials && f != Family::polynomials; }

void StreamSpec::validate() const {
  if (N == 0) throw SpecError("N must be positive");
  if (m == 0) throw SpecError("m must be positive");
  if (S == 0) throw SpecError("S must be positive");
  if (d < 1) throw SpecError("d must be at least 1");
  if (p_min < 0.0 || p_min > 1.0) throw SpecError("p_min must lie in [0, 1]");
  if (family == Family::overcomplete_trees) {
    if (K1 == 0 || K2 == 0) throw SpecError("K1 and K2 must be positive");
    if (K2 >= N) throw SpecError("overcomplete model needs more features than anchors");
    if (t == 0) throw SpecError("t must be positive");
  } else {
    if (K == 0) throw SpecError("K must be positive");
    if (K > N) throw SpecError("K must not exceed N");
  }
  if (is_tree_family(family)) {
    if (static_cast<std::size_t>(d) > s) throw SpecError("d must not exceed s");
    if (metafeature_depth < 1 || metafeature_depth > d)
      throw SpecError("metafeature depth must lie in [1, d]");
    if (family == Family::anchor_trees && K >= N) throw SpecError("anchor model needs more features than anchors");
    if (family == Family::lists && static_cast<std::size_t>(metafeature_depth) > N)
      throw SpecError("list metafeatures need distinct variables");
  } else {
    if (d > 12) throw SpecError("d above 12 exceeds the moment table");
    if (grid_log2 < 1 || grid_log2 > 40) throw SpecError("grid_log2 must lie in [1, 40]");
    if (family == Family::polynomials && t == 0) throw SpecError("t must be positive");
  }
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void fill_reduced_labels(IncompleteTree& t, std::mt19937_64& rng) {
  auto empties = t.empty_leaves();
  std::set<NodeId> filled(empties.begin(), empties.end());
  for (NodeId u : empties) t.assign(u, coin(rng));
  for (NodeId n : t.preorder()) {
    if (!t.is_internal(n)) continue;
    NodeId l = t.child(n, false), r = t.child(n, true);
    if (!t.is_leaf(l) || !t.is_leaf(r) || t.node(l).label != t.node(r).label) continue;
    if (filled.contains(r))
      t.relabel(r, !t.node(r).label);
    else if (filled.contains(l))
      t.relabel(l, !t.node(l).label);
    else
      throw InternalConsistencyError("fixed cherry carries a single label");
  }
}

bool is_reduced(const DecisionTree& t) {
  if (!t.complete()) return false;
  std::function<int(NodeId)> mask = [&](NodeId n) -> int {
    if (t.is_leaf(n)) return t.node(n).label ? 2 : 1;
    int a = mask(t.child(n, false));
    int b = mask(t.child(n, true));
    if (a < 0 || b < 0 || (a | b) != 3) return -1;
    return 3;
  };
  return t.is_leaf(t.root()) || mask(t.root()) == 3;
}

DecisionTree random_reduced_tree(const std::vector<Feature>& pool, int max_depth, std::size_t max_size,
                                 std::mt19937_64& rng) {
  if (pool.empty()) throw SpecError("no variables available for a random tree");
  IncompleteTree t = random_metafeature(std::nullopt, pool, max_depth, max_size, rng, 1.0);
  fill_reduced_labels(t, rng);
  return t;
}

TreeTask make_tree_task(const DecisionTree& target, std::size_t N, std::size_t S, std::mt19937_64& rng, bool good) {
  auto leaves = target.leaves();
  const std::size_t rows = std::max(S, leaves.size());
  std::vector<std::uint8_t> cells(rows * N);
  std::bernoulli_distribution bit(0.5);
  for (auto& c : cells) c = bit(rng) ? 1 : 0;
  for (std::size_t k = 0; k < leaves.size(); ++k) {
    auto path = target.path_to(leaves[k]);
    auto dirs = target.directions_to(leaves[k]);
    for (std::size_t j = 0; j < dirs.size(); ++j) cells[k * N + target.node(path[j]).var] = dirs[j] ? 1 : 0;
  }
  std::vector<bool> labels(rows);
  for (std::size_t e = 0; e < rows; ++e)
    labels[e] = predict(target, std::span<const std::uint8_t>(cells.data() + e * N, N));
  auto leaf_of = route_all(target, cells, N);
  return TreeTask{BoolDataset(N, std::move(cells), std::move(labels)), target, std::move(leaf_of), good};
}

TreeStream gen_tree_stream(const StreamSpec& spec) {
  spec.validate();
  if (!is_tree_family(spec.family)) throw SpecError("gen_tree_stream needs a tree family");
  std::mt19937_64 rng(spec.seed);
  TreeModel model = draw_tree_model(spec, rng);
  TreeStream out;
  for (const auto& f : model.F) out.F.add(f);
  out.anchors = model.anchors;
  for (std::size_t j = 0; j < spec.m; ++j)
    out.tasks.push_back(make_tree_task(draw_tree_target(model, spec, rng), spec.N, spec.S, rng));
  return out;
}

GridDataset make_grid_dataset(std::size_t N, std::size_t S, const ProductDistribution& dist,
                              const std::function<Rational(std::span<const std::uint64_t>, std::uint64_t)>& label_of,
                              std::mt19937_64& rng) {
  std::vector<std::uint64_t> cells(S * N);
  for (auto& c : cells) c = dist.sample(rng);
  std::vector<Rational> labels;
  labels.reserve(S);
  for (std::size_t e = 0; e < S; ++e)
    labels.push_back(label_of(std::span<const std::uint64_t>(cells.data() + e * N, N), dist.denominator()));
  return GridDataset(N, dist.denominator(), std::move(cells), std::move(labels));
}

MonomialStream gen_monomial_stream(const StreamSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  MonomialStream out{{}, draw_monomial_columns(spec, rng), ProductDistribution::grid_uniform(spec.grid_log2)};
  for (std::size_t j = 0; j < spec.m; ++j)
    out.tasks.push_back(make_monomial_task(draw_combination(out.F, static_cast<unsigned>(spec.d), rng), spec,
                                           out.dist, rng, true));
  return out;
}

PolynomialStream gen_poly_stream(const StreamSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  PolynomialStream out{{}, draw_monomial_columns(spec, rng), ProductDistribution::grid_uniform(spec.grid_log2)};
  for (std::size_t j = 0; j < spec.m; ++j)
    out.tasks.push_back(
        make_poly_task(draw_polynomial(out.F, static_cast<unsigned>(spec.d), spec.t, rng), spec, out.dist, rng, true));
  return out;
}

std::vector<std::size_t> bad_positions(std::size_t m, std::size_t r, Placement placement, std::mt19937_64& rng) {
  const std::size_t total = m + r;
  std::vector<std::size_t> pos;
  if (r == 0) return pos;
  switch (placement) {
    case Placement::adversarial_first:
      for (std::size_t k = 0; k < r; ++k) pos.push_back(k);
      break;
    case Placement::adversarial_interleaved: {
      const std::size_t step = (total + r - 1) / r;
      std::set<std::size_t> taken;
      for (std::size_t k = 0; k < r; ++k) {
        std::size_t p = std::min(k * step, total - 1);
        while (taken.contains(p)) --p;
        taken.insert(p);
      }
      pos.assign(taken.begin(), taken.end());
      break;
    }
    case Placement::random: {
      std::vector<std::size_t> all(total);
      std::iota(all.begin(), all.end(), std::size_t{0});
      std::shuffle(all.begin(), all.end(), rng);
      pos.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(r));
      std::sort(pos.begin(), pos.end());
      break;
    }
  }
  return pos;
}

TreeStream gen_agnostic_tree_stream(const StreamSpec& spec) {
  spec.validate();
  if (!is_tree_family(spec.family)) throw SpecError("gen_agnostic_tree_stream needs a tree family");
  std::mt19937_64 rng(spec.seed);
  TreeModel model = draw_tree_model(spec, rng);
  auto free = minus(all_features(spec.N), tree_model_vars(model));
  if (spec.r > 0 && free.empty()) throw SpecError("no features outside the metafeatures for bad targets");
  std::vector<TreeTask> goods, bads;
  for (std::size_t j = 0; j < spec.m; ++j)
    goods.push_back(make_tree_task(draw_tree_target(model, spec, rng), spec.N, spec.S, rng, true));
  for (std::size_t j = 0; j < spec.r; ++j) {
    DecisionTree b = spec.family == Family::lists ? random_list(free, spec.d, rng)
                                                  : random_reduced_tree(free, spec.d, spec.s, rng);
    bads.push_back(make_tree_task(b, spec.N, spec.S, rng, false));
  }
  TreeStream out;
  for (const auto& f : model.F) out.F.add(f);
  out.anchors = model.anchors;
  out.tasks = place_bad_targets(std::move(goods), std::move(bads), spec.placement, rng);
  return out;
}

MonomialStream gen_agnostic_monomial_stream(const StreamSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  MonomialStream out{{}, draw_monomial_columns(spec, rng), ProductDistribution::grid_uniform(spec.grid_log2)};
  auto free = monomial_free_features(out.F, spec.N);
  if (spec.r > 0 && free.empty()) throw SpecError("no features outside the metafeatures for bad targets");
  std::vector<MonomialTask> goods, bads;
  const unsigned d = static_cast<unsigned>(spec.d);
  for (std::size_t j = 0; j < spec.m; ++j)
    goods.push_back(make_monomial_task(draw_combination(out.F, d, rng), spec, out.dist, rng, true));
  for (std::size_t j = 0; j < spec.r; ++j)
    bads.push_back(make_monomial_task(draw_free_monomial(free, spec.N, d, rng), spec, out.dist, rng, false));
  out.tasks = place_bad_targets(std::move(goods), std::move(bads), spec.placement, rng);
  return out;
}

PolynomialStream gen_agnostic_poly_stream(const StreamSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  PolynomialStream out{{}, draw_monomial_columns(spec, rng), ProductDistribution::grid_uniform(spec.grid_log2)};
  auto free = monomial_free_features(out.F, spec.N);
  if (spec.r > 0 && free.empty()) throw SpecError("no features outside the metafeatures for bad targets");
  std::vector<PolynomialTask> goods, bads;
  const unsigned d = static_cast<unsigned>(spec.d);
  for (std::size_t j = 0; j < spec.m; ++j)
    goods.push_back(make_poly_task(draw_polynomial(out.F, d, spec.t, rng), spec, out.dist, rng, true));
  for (std::size_t j = 0; j < spec.r; ++j) {
    Polynomial p(spec.N);
    p.add_term(draw_free_monomial(free, spec.N, d, rng), draw_coefficient(rng));
    bads.push_back(make_poly_task(p, spec, out.dist, rng, false));
  }
  out.tasks = place_bad_targets(std::move(goods), std::move(bads), spec.placement, rng);
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::realizable: return "Realizable";
    case Regime::intermediate: return "Intermediate";
    case Regime::large1: return "Large1";
    case Regime::large2: return "Large2";
  }
  return "?";
}

Regime regime_from_string(const std::string& s) {
  if (s == "Realizable") return Regime::realizable;
  if (s == "Intermediate") return Regime::intermediate;
  if (s == "Large1") return Regime::large1;
  if (s == "Large2") return Regime::large2;
  throw SpecError("unknown regime: " + s);
}

RegimeBounds regime_bounds(std::size_t N, std::size_t K, std::size_t m) {
  const double n = static_cast<double>(N), k = static_cast<double>(K), mm = static_cast<double>(m);
  double r_min = std::max({mm / n, k * n / mm, k});
  double r_max = std::min(mm * n / k, (n - k) * (n - k) * mm / (k * n));
  return {r_min, r_max};
}

TreeStream gen_adversary_stream(Regime regime, std::size_t N, std::size_t K, std::size_t m, std::size_t r,
                                std::size_t S, std::uint64_t seed) {
  if (K == 0 || K >= N) throw SpecError("adversary streams need 0 < K < N");
  if (m == 0) throw SpecError("m must be positive");
  const auto b = regime_bounds(N, K, m);
  const double rr = static_cast<double>(r), n = static_cast<double>(N), k = static_cast<double>(K),
               mm = static_cast<double>(m);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Feature> any(0, static_cast<Feature>(N - 1));
  std::vector<Feature> features;
  auto designate = [&] {
    auto shuffled = all_features(N);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    return std::set<Feature>(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(K));
  };
  std::set<Feature> good;
  auto uniform_prefix = [&](double count) {
    auto c = static_cast<std::size_t>(std::llround(count));
    for (std::size_t j = 0; j < c; ++j) features.push_back(any(rng));
  };
  auto good_suffix = [&] {
    std::vector<Feature> g(good.begin(), good.end());
    for (std::size_t j = 0; j < m; ++j) features.push_back(pick(g, rng));
  };
  switch (regime) {
    case Regime::realizable: {
      auto shuffled = all_features(N);
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      good = {shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(K)};
      std::vector<Feature> g(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(K));
      for (std::size_t j = 0; j < m; ++j) features.push_back(j < K ? g[j] : pick(g, rng));
      break;
    }
    case Regime::intermediate:
      if (rr < b.r_min || rr > b.r_max) throw SpecError("intermediate regime needs r_min <= r <= r_max");
      uniform_prefix(rr * n / (n - k));
      good = designate();
      good_suffix();
      break;
    case Regime::large1:
      if (rr < mm * n / k || rr < b.r_min) throw SpecError("large-r case 1 needs r >= mN/K and r >= r_min");
      uniform_prefix(mm * n / k);
      good = designate();
      break;
    case Regime::large2:
      if (rr >= mm * n / k || rr < (n - k) * (n - k) * mm / (k * n) || rr < b.r_min)
        throw SpecError("large-r case 2 needs (N-K)^2 m/(KN) <= r < mN/K and r >= r_min");
      uniform_prefix(std::sqrt(rr * n * mm / k));
      good = designate();
      good_suffix();
      break;
  }
  TreeStream out;
  for (Feature f : good) out.F.add(IncompleteTree::stump(f));
  for (Feature f : features)
    out.tasks.push_back(make_tree_task(IncompleteTree::stump(f, false, true), N, S, rng, good.contains(f)));
  return out;
}

namespace {

std::size_t scan_learner(std::size_t S, std::size_t pool, const std::vector<bool>& labels, const GameProbe& probe,
                         std::size_t budget, std::mt19937_64& rng, bool shuffle) {
  std::vector<std::size_t> order(pool);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) std::shuffle(order.begin(), order.end(), rng);
  const std::size_t columns = std::min(pool, S == 0 ? pool : budget / S);
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < pool; ++k) {
    std::size_t i = order[k];
    if (k >= columns) {
      candidates.push_back(i);
      continue;
    }
    bool consistent = true;
    for (std::size_t e = 0; e < S && consistent; ++e) {
      auto v = probe(e, i);
      if (!v) return i;
      consistent = (*v != 0) == labels[e];
    }
    if (consistent) candidates.push_back(i);
  }
  if (candidates.empty()) return 0;
  return pick(candidates, rng);
}

}  // namespace

std::size_t column_scan_learner(std::size_t S, std::size_t pool, const std::vector<bool>& labels,
                                const GameProbe& probe, std::size_t budget, std::mt19937_64& rng) {
  return scan_learner(S, pool, labels, probe, budget, rng, false);
}

std::size_t random_scan_learner(std::size_t S, std::size_t pool, const std::vector<bool>& labels,
                                const GameProbe& probe, std::size_t budget, std::mt19937_64& rng) {
  return scan_learner(S, pool, labels, probe, budget, rng, true);
}

GameResult play_single_feature_game(const GameLearner& learner, std::size_t budget, std::size_t pool,
                                    std::size_t S, std::uint64_t seed) {
  if (pool == 0 || S == 0) throw UsageError("game needs a nonempty pool and sample");
  if (budget > S * pool) throw UsageError("budget exceeds S * pool");
  std::mt19937_64 rng(seed);
  // Columns are drawn pairwise distinct whenever 2^S allows it.
  const bool distinct = S >= 64 || (std::uint64_t{1} << S) >= pool;
  std::vector<std::vector<std::uint8_t>> columns;
  std::set<std::vector<std::uint8_t>> seen;
  std::bernoulli_distribution bit(0.5);
  while (columns.size() < pool) {
    std::vector<std::uint8_t> col(S);
    for (auto& c : col) c = bit(rng) ? 1 : 0;
    if (distinct && !seen.insert(col).second) continue;
    columns.push_back(std::move(col));
  }
  const std::size_t target = std::uniform_int_distribution<std::size_t>(0, pool - 1)(rng);
  std::vector<bool> labels(S);
  for (std::size_t e = 0; e < S; ++e) labels[e] = columns[target][e] != 0;

  ProbeLedger ledger(S, pool);
  GameResult result;
  GameProbe probe = [&](std::size_t e, std::size_t i) -> std::optional<std::uint8_t> {
    if (e >= S || i >= pool) throw UsageError("probe index out of range");
    if (!ledger.contains(e, i)) {
      if (ledger.total() >= budget) {
        result.forfeit = true;
        return std::nullopt;
      }
      ledger.record(e, i);
    }
    return columns[i][e];
  };
  std::size_t named = learner(S, pool, labels, probe, budget, rng);
  result.probes = ledger.total();
  result.win = !result.forfeit && named == target;
  return result;
}

}  // namespace lifelong
