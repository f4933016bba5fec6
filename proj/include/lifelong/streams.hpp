#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lifelong/monomial.hpp"
#include "lifelong/polynomial.hpp"
#include "lifelong/tree_lifelong.hpp"

namespace lifelong {

enum class Family {
  trees,
  lists,
  anchor_trees,
  overcomplete_trees,
  semi_adversarial_trees,
  monomials,
  polynomials
};

enum class Placement { random, adversarial_first, adversarial_interleaved };

std::string to_string(Family f);
Family family_from_string(const std::string& s);
std::string to_string(Placement p);
Placement placement_from_string(const std::string& s);
bool is_tree_family(Family f);

struct StreamSpec {
  Family family = Family::trees;
  std::size_t N = 16;
  std::size_t K = 2;
  int d = 4;
  std::size_t s = 15;
  unsigned t = 2;  // polynomial sparsity, or metafeatures per path for overcomplete trees
  std::size_t m = 10;
  std::size_t r = 0;
  std::size_t S = 32;
  std::uint64_t seed = 1;
  Placement placement = Placement::random;
  double p_min = 0.0;  // semi-adversarial streams; 0 means 1/K
  std::size_t K1 = 2;
  std::size_t K2 = 2;
  int metafeature_depth = 2;
  unsigned grid_log2 = 20;

  void validate() const;
};

// Deterministic per-trial seed derived from the run seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

struct TreeStream {
  std::vector<TreeTask> tasks;
  MetafeatureSet F;
  std::set<Feature> anchors;  // anchor and overcomplete models
};

// One example per leaf of `target` plus uniform examples up to S rows in total.
TreeTask make_tree_task(const DecisionTree& target, std::size_t N, std::size_t S, std::mt19937_64& rng,
                        bool good = true);

// Random tree over `pool` with distinct path variables, depth <= max_depth and
// size <= max_size, every internal node having both labels below it.
DecisionTree random_reduced_tree(const std::vector<Feature>& pool, int max_depth, std::size_t max_size,
                                 std::mt19937_64& rng);

// Labels every empty leaf so that no internal node has a single label below it.
// Leaves that already carry labels are kept.
void fill_reduced_labels(IncompleteTree& t, std::mt19937_64& rng);
bool is_reduced(const DecisionTree& t);

TreeStream gen_tree_stream(const StreamSpec& spec);

struct MonomialTask {
  GridDataset data;
  GridDataset verify;  // one row, used by LFD to confirm a candidate
  Monomial target;
  bool good = true;
};

struct MonomialStream {
  std::vector<MonomialTask> tasks;
  std::vector<Monomial> F;
  ProductDistribution dist;
};

struct PolynomialTask {
  GridDataset data;
  GridDataset verify;
  Polynomial target;
  bool good = true;
};

struct PolynomialStream {
  std::vector<PolynomialTask> tasks;
  std::vector<Monomial> F;
  ProductDistribution dist;
};

MonomialStream gen_monomial_stream(const StreamSpec& spec);
PolynomialStream gen_poly_stream(const StreamSpec& spec);

// Draws a grid dataset of S rows labeled by `label_of`.
GridDataset make_grid_dataset(std::size_t N, std::size_t S, const ProductDistribution& dist,
                              const std::function<Rational(std::span<const std::uint64_t>, std::uint64_t)>& label_of,
                              std::mt19937_64& rng);

// Positions of the bad tasks in a stream of m + r tasks, ascending.
std::vector<std::size_t> bad_positions(std::size_t m, std::size_t r, Placement placement, std::mt19937_64& rng);

// Interleaves goods (in order) with bads per the placement rule.
template <class Task>
std::vector<Task> place_bad_targets(std::vector<Task> goods, std::vector<Task> bads, Placement placement,
                                    std::mt19937_64& rng) {
  const std::size_t total = goods.size() + bads.size();
  auto pos = bad_positions(goods.size(), bads.size(), placement, rng);
  std::vector<Task> out;
  out.reserve(total);
  std::size_t g = 0, b = 0;
  for (std::size_t k = 0; k < total; ++k) {
    if (b < pos.size() && pos[b] == k)
      out.push_back(std::move(bads[b++]));
    else
      out.push_back(std::move(goods[g++]));
  }
  return out;
}

// Agnostic streams: m good targets plus r targets built over features outside F.
TreeStream gen_agnostic_tree_stream(const StreamSpec& spec);
MonomialStream gen_agnostic_monomial_stream(const StreamSpec& spec);
PolynomialStream gen_agnostic_poly_stream(const StreamSpec& spec);

enum class Regime { realizable, intermediate, large1, large2 };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& s);

struct RegimeBounds {
  double r_min;
  double r_max;
};
// r_min = max(m/N, KN/m, K); r_max = min(mN/K, (N-K)^2 m / (KN)).
RegimeBounds regime_bounds(std::size_t N, std::size_t K, std::size_t m);

// Stump targets; labels are "+" where the chosen feature is 1.
TreeStream gen_adversary_stream(Regime regime, std::size_t N, std::size_t K, std::size_t m, std::size_t r,
                                std::size_t S, std::uint64_t seed);

// The learner side of the single-feature game. `probe` returns nullopt once the
// budget is spent; a learner that asks past it forfeits.
using GameProbe = std::function<std::optional<std::uint8_t>(std::size_t example, std::size_t feature)>;
using GameLearner = std::function<std::size_t(std::size_t S, std::size_t pool, const std::vector<bool>& labels,
                                              const GameProbe& probe, std::size_t budget, std::mt19937_64& rng)>;

// Probes whole columns in index order while budget remains, then names a uniform
// choice among features not ruled out.
std::size_t column_scan_learner(std::size_t S, std::size_t pool, const std::vector<bool>& labels,
                                const GameProbe& probe, std::size_t budget, std::mt19937_64& rng);
// Same, scanning columns in a random order.
std::size_t random_scan_learner(std::size_t S, std::size_t pool, const std::vector<bool>& labels,
                                const GameProbe& probe, std::size_t budget, std::mt19937_64& rng);

struct GameResult {
  bool win = false;
  bool forfeit = false;
  std::size_t probes = 0;
};

GameResult play_single_feature_game(const GameLearner& learner, std::size_t budget, std::size_t pool,
                                    std::size_t S, std::uint64_t seed);

}  // namespace lifelong
