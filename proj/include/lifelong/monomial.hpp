#pragma once

#include <compare>
#include <optional>
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lifelong/costly_data.hpp"
#include "lifelong/rational.hpp"

namespace lifelong {

struct Monomial {
  std::vector<std::uint32_t> exponents;

  Monomial() = default;
  explicit Monomial(std::size_t n) : exponents(n, 0) {}
  explicit Monomial(std::vector<std::uint32_t> e) : exponents(std::move(e)) {}
  static Monomial unit(std::size_t n, Feature i, std::uint32_t power = 1);

  std::size_t size() const { return exponents.size(); }
  unsigned degree() const;
  std::vector<Feature> support() const;
  std::uint32_t operator[](std::size_t i) const { return exponents[i]; }

  auto operator<=>(const Monomial&) const = default;
};

// Exact value at a grid point: prod (row_i / den)^g_i.
Rational evaluate_on_grid(const Monomial& g, std::span<const std::uint64_t> row, std::uint64_t den);
// Probes the support of g on one example.
Rational evaluate(const Monomial& g, GridDataset& ds, std::size_t example);

// Identical marginals on [1, 2]: uniform over the grid {1 + j/M} or the continuous uniform.
class ProductDistribution {
 public:
  enum class Kind { grid_uniform, continuous_uniform };

  static ProductDistribution grid_uniform(unsigned log2_denominator = 20);
  static ProductDistribution continuous_uniform();

  Kind kind() const { return kind_; }
  std::uint64_t denominator() const;
  const Rational& moment(unsigned j) const;  // E[x^j]
  double mean_log2() const { return mean_log2_; }
  double mean_log2_sq() const { return mean_log2_sq_; }
  double var_log2() const { return mean_log2_sq_ - mean_log2_ * mean_log2_; }  // c
  // Grid numerator M + j for a uniform j in [0, M].
  std::uint64_t sample(std::mt19937_64& rng) const;

 private:
  ProductDistribution() = default;
  void extend_moments(unsigned j) const;

  Kind kind_ = Kind::grid_uniform;
  unsigned log2_den_ = 20;
  mutable std::vector<Rational> moments_;
  double mean_log2_ = 0.0;
  double mean_log2_sq_ = 0.0;
};

// Exact power sum 1^j + ... + n^j.
BigInt power_sum(const BigInt& n, unsigned j);

class RepresentationMatrix {
 public:
  explicit RepresentationMatrix(std::size_t n_rows = 0) : n_rows_(n_rows) {}

  std::size_t rows() const { return n_rows_; }
  std::size_t rank() const { return columns_.size(); }
  bool empty() const { return columns_.empty(); }
  const std::vector<Monomial>& columns() const { return columns_; }

  bool in_span(const Monomial& g) const;
  void insert(const Monomial& g);  // rejects dependent columns
  void clear();

  const std::vector<std::size_t>& independent_rows() const { return rows_I_; }
  // w with F[I] w = values, where values are indexed like independent_rows().
  std::vector<Rational> solve(const std::vector<Rational>& values) const;
  std::vector<Rational> combine(const std::vector<Rational>& w) const;

 private:
  void refresh();

  std::size_t n_rows_ = 0;
  std::vector<Monomial> columns_;
  std::vector<std::size_t> rows_I_;
  std::vector<std::vector<Rational>> inverse_;
};

std::vector<std::size_t> independent_rows(const RepresentationMatrix& rep);
std::size_t exact_rank(const std::vector<std::vector<Rational>>& columns);

enum class EstimationMode { exact, sampled };

struct PowerEstimator {
  EstimationMode mode = EstimationMode::exact;
  const Monomial* truth = nullptr;  // exact mode: the population oracle's target
};

// Probes feature i on every example and returns the rounded log-correlation ratio.
unsigned estimate_power(GridDataset& ds, Feature i, const ProductDistribution& dist, const PowerEstimator& est);

std::size_t sampled_sample_size(unsigned d, double c, std::size_t N, std::size_t m, double delta,
                                double constant = 4.0);

Monomial learn_monomial_scratch(GridDataset& ds, const ProductDistribution& dist, unsigned d,
                                const PowerEstimator& est);

enum class MonomialFailure { empty_representation, degree_exceeded, not_natural, verification_mismatch };

struct MonomialLearned {
  Monomial g;
};
struct MonomialFailed {
  MonomialFailure reason;
};
using MonomialOutcome = std::variant<MonomialLearned, MonomialFailed>;

MonomialOutcome lfd_monomial(GridDataset& ds, GridDataset& verify, const RepresentationMatrix& rep,
                             const ProductDistribution& dist, unsigned d, const PowerEstimator& est);

RepresentationMatrix improve_rep_monomial(RepresentationMatrix rep, const Monomial& g);

MonomialOutcome naive_lfd_seen_monomial(GridDataset& ds, GridDataset& verify, const std::set<Feature>& seen,
                                        const ProductDistribution& dist, unsigned d, const PowerEstimator& est);

// Turns a rational vector into a natural exponent vector; nullopt if any entry is not.
std::optional<Monomial> as_natural(const std::vector<Rational>& v);

nlohmann::json to_json(const Monomial& g);
Monomial monomial_from_json(const nlohmann::json& j, std::size_t n);

}  // namespace lifelong
