#include <random>

#include "doctest.h"
#include "lifelong/streams.hpp"

using namespace lifelong;

namespace {

StreamSpec tree_spec(Family family, std::uint64_t seed) {
  StreamSpec s;
  s.family = family;
  s.N = 16;
  s.K = 3;
  s.d = 4;
  s.s = 12;
  s.m = 20;
  s.S = 24;
  s.seed = seed;
  s.metafeature_depth = 2;
  return s;
}

StreamSpec grid_spec(Family family, std::uint64_t seed) {
  StreamSpec s;
  s.family = family;
  s.N = 8;
  s.K = 3;
  s.d = 4;
  s.t = 2;
  s.m = 10;
  s.S = 16;
  s.seed = seed;
  return s;
}

RepresentationMatrix rep_of(const std::vector<Monomial>& F) {
  RepresentationMatrix rep(F.front().size());
  for (const auto& f : F) rep.insert(f);
  return rep;
}

// Weights of g over the columns, or nullopt when g is off the span or the weights are not natural.
std::optional<std::vector<Rational>> natural_weights(const RepresentationMatrix& rep, const Monomial& g) {
  if (!rep.in_span(g)) return std::nullopt;
  std::vector<Rational> gI;
  for (std::size_t r : rep.independent_rows()) gI.emplace_back(g[r]);
  auto w = rep.solve(gI);
  for (const auto& x : w)
    if (sgn(x) < 0 || x.get_den() != 1) return std::nullopt;
  return w;
}

bool labels_match_target(const TreeTask& task) {
  const auto& cells = task.data.unmetered_cells();
  const std::size_t N = task.data.num_features();
  for (std::size_t e = 0; e < task.data.num_examples(); ++e)
    if (predict(task.target, std::span<const std::uint8_t>(cells.data() + e * N, N)) != task.data.label(e))
      return false;
  return true;
}

std::set<Feature> variables_of(const MetafeatureSet& F) {
  std::set<Feature> out;
  for (const auto& f : F)
    for (Feature v : f.variables()) out.insert(v);
  return out;
}

}  // namespace

TEST_CASE("per-trial seeds follow splitmix64") {
  // independent oracle: the reference splitmix64 stepping generator
  auto reference = [](std::uint64_t state, std::uint64_t steps) {
    std::uint64_t z = 0;
    for (std::uint64_t k = 0; k < steps; ++k) {
      state += 0x9E3779B97F4A7C15ULL;
      z = state;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      z ^= z >> 31;
    }
    return z;
  };
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 200; ++t) {
    CHECK(trial_seed(7, t) == reference(7, t + 1));
    seen.insert(trial_seed(7, t));
  }
  CHECK(seen.size() == 200);
}

TEST_CASE("spec validation") {
  auto ok = tree_spec(Family::trees, 1);
  CHECK_NOTHROW(ok.validate());
  auto bad = ok;
  bad.d = 13;
  CHECK_THROWS_AS(bad.validate(), SpecError);  // d > s
  bad = ok;
  bad.metafeature_depth = 5;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.K = 17;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.K = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.m = 0;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.p_min = 1.5;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.family = Family::anchor_trees;
  bad.K = 16;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  bad = ok;
  bad.family = Family::overcomplete_trees;
  bad.K2 = 16;
  CHECK_THROWS_AS(bad.validate(), SpecError);
  auto g = grid_spec(Family::polynomials, 1);
  CHECK_NOTHROW(g.validate());
  g.t = 0;
  CHECK_THROWS_AS(g.validate(), SpecError);
  g = grid_spec(Family::monomials, 1);
  g.d = 13;
  CHECK_THROWS_AS(g.validate(), SpecError);
  g = grid_spec(Family::monomials, 1);
  g.grid_log2 = 0;
  CHECK_THROWS_AS(g.validate(), SpecError);
  CHECK_THROWS_AS(family_from_string("Forests"), SpecError);
  CHECK_THROWS_AS(placement_from_string("first"), SpecError);
  CHECK(family_from_string(to_string(Family::overcomplete_trees)) == Family::overcomplete_trees);
  CHECK(placement_from_string(to_string(Placement::adversarial_interleaved)) == Placement::adversarial_interleaved);
}

TEST_CASE("tree streams are deterministic per seed") {
  auto a = gen_tree_stream(tree_spec(Family::trees, 5));
  auto b = gen_tree_stream(tree_spec(Family::trees, 5));
  auto c = gen_tree_stream(tree_spec(Family::trees, 6));
  REQUIRE(a.tasks.size() == b.tasks.size());
  bool differs = false;
  for (std::size_t j = 0; j < a.tasks.size(); ++j) {
    CHECK(a.tasks[j].target.canonical() == b.tasks[j].target.canonical());
    CHECK(a.tasks[j].data.unmetered_cells() == b.tasks[j].data.unmetered_cells());
    CHECK(a.tasks[j].data.labels() == b.tasks[j].data.labels());
    differs = differs || a.tasks[j].target.canonical() != c.tasks[j].target.canonical();
  }
  CHECK(differs);
}

TEST_CASE("tasks cover every leaf and labels follow the target") {
  std::mt19937_64 rng(3);
  std::vector<Feature> pool{0, 1, 2, 3, 4, 5};
  for (int trial = 0; trial < 30; ++trial) {
    auto target = random_reduced_tree(pool, 3, 7, rng);
    CHECK(is_reduced(target));
    auto task = make_tree_task(target, 6, 2, rng);
    CHECK(task.data.num_examples() == std::max<std::size_t>(2, target.leaves().size()));
    CHECK(labels_match_target(task));
    std::set<NodeId> hit(task.target_leaf.begin(), task.target_leaf.end());
    for (NodeId leaf : target.leaves()) CHECK(hit.contains(leaf));
    CHECK(task.data.ledger().total() == 0);
  }
}

TEST_CASE("reduced labeling keeps fixed leaves") {
  std::mt19937_64 rng(4);
  auto t = IncompleteTree::stump(0);
  t.assign(t.child(t.root(), false), true);
  fill_reduced_labels(t, rng);
  CHECK(t.node(t.child(t.root(), false)).label == true);
  CHECK(t.node(t.child(t.root(), true)).label == false);
  auto fixed = IncompleteTree::stump(0, true, true);
  CHECK_FALSE(is_reduced(fixed));
  CHECK(is_reduced(IncompleteTree::constant(false)));
}

TEST_CASE("property: generated tree targets lie in DT(F)") {
  for (Family fam : {Family::trees, Family::lists, Family::anchor_trees, Family::semi_adversarial_trees}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto spec = tree_spec(fam, seed);
      auto stream = gen_tree_stream(spec);
      CHECK(stream.F.size() == spec.K);
      for (const auto& task : stream.tasks) {
        CHECK(task.good);
        CHECK(is_reduced(task.target));
        CHECK(task.target.depth() <= spec.d);
        CHECK(task.target.size() <= spec.s);
        CHECK(labels_match_target(task));
        CHECK(member_of_dt(task.target, stream.F, true));
        if (fam == Family::lists) CHECK(is_decision_list(task.target));
      }
    }
  }
}

TEST_CASE("anchor audit") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto spec = tree_spec(Family::anchor_trees, seed);
    auto stream = gen_tree_stream(spec);
    REQUIRE(stream.anchors.size() == spec.K);
    std::set<Feature> roots;
    for (const auto& f : stream.F) {
      // the anchor sits at the root and nowhere else
      Feature root = f.node(f.root()).var;
      CHECK(stream.anchors.contains(root));
      roots.insert(root);
      for (NodeId n : f.preorder())
        if (n != f.root() && f.is_internal(n)) CHECK_FALSE(stream.anchors.contains(f.node(n).var));
    }
    CHECK(roots == stream.anchors);
    for (const auto& task : stream.tasks) {
      CHECK(stream.anchors.contains(task.target.node(task.target.root()).var));
      for (const auto& piece : cut_at_anchors(task.target, stream.anchors)) {
        Feature root = piece.node(piece.root()).var;
        CHECK(stream.anchors.contains(root));
      }
    }
  }
}

TEST_CASE("overcomplete streams") {
  auto spec = tree_spec(Family::overcomplete_trees, 2);
  spec.K1 = 2;
  spec.K2 = 2;
  spec.t = 2;
  auto stream = gen_tree_stream(spec);
  CHECK(stream.anchors.size() == 2);
  CHECK(stream.F.size() <= spec.K1 * spec.K2);
  for (const auto& task : stream.tasks) {
    CHECK(member_of_dt(task.target, stream.F, true));
    // at most t metafeature roots on any path
    for (NodeId leaf : task.target.leaves()) {
      std::size_t count = 0;
      for (NodeId n : task.target.path_to(leaf))
        if (task.target.is_internal(n) && stream.anchors.contains(task.target.node(n).var)) ++count;
      CHECK(count <= spec.t);
    }
  }
}

TEST_CASE("monomial and polynomial streams stay in the natural span of F") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ms = gen_monomial_stream(grid_spec(Family::monomials, seed));
    std::vector<std::vector<Rational>> cols;
    for (const auto& f : ms.F) cols.emplace_back(f.exponents.begin(), f.exponents.end());
    CHECK(exact_rank(cols) == 3);
    auto rep = rep_of(ms.F);
    for (const auto& task : ms.tasks) {
      CHECK(task.target.degree() >= 1);
      CHECK(task.target.degree() <= 4);
      CHECK(natural_weights(rep, task.target).has_value());
      CHECK(task.data.num_examples() == 16);
      CHECK(task.verify.num_examples() == 1);
      const auto& cells = task.data.unmetered_cells();
      for (std::size_t e = 0; e < 16; ++e)
        CHECK(task.data.label(e) ==
              evaluate_on_grid(task.target, std::span<const std::uint64_t>(cells.data() + e * 8, 8),
                               task.data.denominator()));
    }
    auto ps = gen_poly_stream(grid_spec(Family::polynomials, seed));
    auto prep = rep_of(ps.F);
    for (const auto& task : ps.tasks) {
      CHECK(task.target.sparsity() >= 1);
      CHECK(task.target.sparsity() <= 2);
      for (const auto& [g, c] : task.target.terms()) {
        CHECK(natural_weights(prep, g).has_value());
        CHECK(sgn(c) != 0);
      }
    }
  }
}

TEST_CASE("bad positions") {
  std::mt19937_64 rng(1);
  CHECK(bad_positions(5, 0, Placement::random, rng).empty());
  CHECK(bad_positions(6, 3, Placement::adversarial_first, rng) == std::vector<std::size_t>{0, 1, 2});
  CHECK(bad_positions(6, 3, Placement::adversarial_interleaved, rng) == std::vector<std::size_t>{0, 3, 6});
  for (int trial = 0; trial < 20; ++trial) {
    auto pos = bad_positions(10, 4, Placement::random, rng);
    REQUIRE(pos.size() == 4);
    CHECK(std::is_sorted(pos.begin(), pos.end()));
    CHECK(std::set<std::size_t>(pos.begin(), pos.end()).size() == 4);
    CHECK(pos.back() < 14);
  }
  auto placed = place_bad_targets<int>({1, 2, 3}, {-1, -2}, Placement::adversarial_interleaved, rng);
  CHECK(placed == std::vector<int>{-1, 1, 2, -2, 3});
}

TEST_CASE("agnostic streams") {
  for (Placement placement : {Placement::random, Placement::adversarial_first, Placement::adversarial_interleaved}) {
    auto spec = tree_spec(Family::trees, 9);
    spec.N = 24;
    spec.r = spec.K;
    spec.placement = placement;
    auto stream = gen_agnostic_tree_stream(spec);
    REQUIRE(stream.tasks.size() == spec.m + spec.r);
    auto inside = variables_of(stream.F);
    std::size_t bad = 0;
    for (std::size_t j = 0; j < stream.tasks.size(); ++j) {
      const auto& task = stream.tasks[j];
      CHECK(labels_match_target(task));
      if (task.good) {
        CHECK(member_of_dt(task.target, stream.F, true));
        continue;
      }
      ++bad;
      if (placement == Placement::adversarial_first) CHECK(j < spec.r);
      CHECK_FALSE(member_of_dt(task.target, stream.F, true));
      for (Feature v : task.target.variables()) CHECK_FALSE(inside.contains(v));
    }
    CHECK(bad == spec.r);

    auto mspec = grid_spec(Family::monomials, 9);
    mspec.N = 12;
    mspec.r = 2;
    mspec.placement = placement;
    auto ms = gen_agnostic_monomial_stream(mspec);
    auto rep = rep_of(ms.F);
    std::size_t mbad = 0;
    for (const auto& task : ms.tasks) {
      if (task.good) continue;
      ++mbad;
      CHECK_FALSE(rep.in_span(task.target));
    }
    CHECK(mbad == 2);

    auto pspec = grid_spec(Family::polynomials, 9);
    pspec.N = 12;
    pspec.r = 2;
    pspec.placement = placement;
    auto ps = gen_agnostic_poly_stream(pspec);
    auto prep = rep_of(ps.F);
    for (const auto& task : ps.tasks)
      if (!task.good) CHECK_FALSE(prep.in_span(task.target.terms().begin()->first));
  }
}

TEST_CASE("adversary regimes") {
  auto b = regime_bounds(20, 2, 40);
  CHECK(b.r_min == doctest::Approx(2.0));
  CHECK(b.r_max == doctest::Approx(324.0));
  SUBCASE("realizable streams open with each good feature once") {
    auto stream = gen_adversary_stream(Regime::realizable, 20, 3, 30, 0, 4, 1);
    REQUIRE(stream.tasks.size() == 30);
    std::set<Feature> first;
    for (std::size_t j = 0; j < 3; ++j) first.insert(stream.tasks[j].target.node(0).var);
    CHECK(first.size() == 3);
    for (const auto& f : stream.F) CHECK(first.contains(f.node(f.root()).var));
    for (const auto& task : stream.tasks) {
      CHECK(task.good);
      CHECK(labels_match_target(task));
    }
  }
  SUBCASE("intermediate prefix length") {
    auto stream = gen_adversary_stream(Regime::intermediate, 20, 2, 40, 10, 4, 1);
    CHECK(stream.tasks.size() == 11 + 40);
    for (std::size_t j = 11; j < stream.tasks.size(); ++j) CHECK(stream.tasks[j].good);
  }
  SUBCASE("regime preconditions") {
    CHECK_THROWS_AS(gen_adversary_stream(Regime::intermediate, 20, 2, 40, 1, 4, 1), SpecError);
    CHECK_THROWS_AS(gen_adversary_stream(Regime::large1, 20, 2, 40, 10, 4, 1), SpecError);
    CHECK_THROWS_AS(gen_adversary_stream(Regime::large2, 20, 2, 40, 10, 4, 1), SpecError);
    CHECK_THROWS_AS(gen_adversary_stream(Regime::realizable, 20, 20, 40, 0, 4, 1), SpecError);
    CHECK_NOTHROW(gen_adversary_stream(Regime::large1, 20, 2, 40, 400, 4, 1));
    CHECK_THROWS_AS(regime_from_string("Huge"), SpecError);
  }
}

TEST_CASE("single-feature game") {
  SUBCASE("no budget means a uniform guess") {
    std::size_t wins = 0;
    for (std::uint64_t t = 0; t < 2000; ++t)
      wins += play_single_feature_game(column_scan_learner, 0, 10, 1, t).win;
    const double tolerance = 0.03;
    CHECK(std::abs(static_cast<double>(wins) / 2000 - 0.1) <= tolerance);
  }
  SUBCASE("full budget with distinct columns always wins") {
    for (std::uint64_t t = 0; t < 50; ++t) {
      auto r = play_single_feature_game(column_scan_learner, 7 * 100, 100, 7, t);
      CHECK(r.win);
      CHECK_FALSE(r.forfeit);
      CHECK(r.probes <= 700);
      CHECK(play_single_feature_game(random_scan_learner, 7 * 100, 100, 7, t).win);
    }
  }
  SUBCASE("asking past the budget forfeits") {
    GameLearner greedy = [](std::size_t S, std::size_t pool, const std::vector<bool>&, const GameProbe& probe,
                            std::size_t, std::mt19937_64&) {
      for (std::size_t i = 0; i < pool; ++i)
        for (std::size_t e = 0; e < S; ++e)
          if (!probe(e, i)) return i;
      return std::size_t{0};
    };
    auto r = play_single_feature_game(greedy, 5, 10, 1, 3);
    CHECK(r.forfeit);
    CHECK_FALSE(r.win);
    CHECK(r.probes == 5);
  }
  CHECK_THROWS_AS(play_single_feature_game(column_scan_learner, 11, 10, 1, 1), UsageError);
  CHECK_THROWS_AS(play_single_feature_game(column_scan_learner, 0, 0, 1, 1), UsageError);
}
