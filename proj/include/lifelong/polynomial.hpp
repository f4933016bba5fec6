#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <variant>
#include <vector>

#include "json.hpp"
#include "lifelong/monomial.hpp"

namespace lifelong {

// Sparse polynomial; terms ordered lexicographically by exponent vector, so the
// lexicographically largest monomial is the last entry.
class Polynomial {
 public:
  explicit Polynomial(std::size_t n_features = 0) : n_(n_features) {}

  std::size_t num_features() const { return n_; }
  void add_term(const Monomial& g, const Rational& coeff);
  const std::map<Monomial, Rational>& terms() const { return terms_; }
  std::size_t sparsity() const { return terms_.size(); }
  unsigned degree() const;
  bool zero() const { return terms_.empty(); }
  std::vector<Feature> support() const;

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  bool operator==(const Polynomial& o) const { return n_ == o.n_ && terms_ == o.terms_; }

  Rational evaluate_on_grid(std::span<const std::uint64_t> row, std::uint64_t den) const;
  Rational evaluate(GridDataset& ds, std::size_t example) const;  // probes the support
  double evaluate_double(std::span<const double> x) const;

 private:
  std::size_t n_;
  std::map<Monomial, Rational> terms_;
};

// Monic polynomials orthogonal under one marginal, degrees 0..2d, with exact norms.
class OrthogonalBasis {
 public:
  OrthogonalBasis(const ProductDistribution& dist, unsigned d);

  unsigned max_degree() const { return static_cast<unsigned>(coeffs_.size()) - 1; }
  const std::vector<Rational>& coefficients(unsigned k) const { return coeffs_.at(k); }
  const Rational& norm(unsigned k) const { return norms_.at(k); }
  // E[H_j * H_k] from the moment table.
  Rational inner(unsigned j, unsigned k) const;
  // E[H_k(x) * x^e].
  const Rational& cross(unsigned k, unsigned e) const;
  double evaluate(unsigned k, double x) const;
  const ProductDistribution& distribution() const { return dist_; }

 private:
  ProductDistribution dist_;
  std::vector<std::vector<Rational>> coeffs_;  // ascending powers
  std::vector<std::vector<double>> coeffs_d_;
  std::vector<Rational> norms_;
  std::vector<std::vector<Rational>> cross_;
};

OrthogonalBasis build_orthogonal_basis(const ProductDistribution& dist, unsigned d);

struct LhsFactor {
  Feature var;
  unsigned degree;
};
// prod over factors of H_degree(x_var).
using Lhs = std::vector<LhsFactor>;

enum class Rhs { residual, residual_squared };

class CorrelationOracle {
 public:
  explicit CorrelationOracle(const OrthogonalBasis& basis, std::size_t n_features)
      : basis_(basis), n_(n_features) {}
  virtual ~CorrelationOracle() = default;

  const OrthogonalBasis& basis() const { return basis_; }
  std::size_t num_features() const { return n_; }

  virtual void set_hypothesis(const Polynomial& g_tilde) = 0;
  virtual std::variant<Rational, double> correlate(const Lhs& lhs, Rhs rhs) = 0;
  // <lhs, residual^2> > 0
  virtual bool detect(const Lhs& lhs) = 0;
  // <prod H_{g_i}(x_i), residual> / prod n_{g_i}
  virtual Rational coefficient(const Monomial& g) = 0;
  virtual bool residual_zero() = 0;
  // Scratch learning reads every cell.
  virtual void probe_all() {}

 protected:
  const OrthogonalBasis& basis_;
  std::size_t n_;
};

// Symbolic expectations against the moment table. When a dataset is attached the
// oracle charges the same cells a sampled estimate would read.
class ExactCorrelationOracle final : public CorrelationOracle {
 public:
  ExactCorrelationOracle(Polynomial target, const OrthogonalBasis& basis, GridDataset* charge = nullptr);

  void set_hypothesis(const Polynomial& g_tilde) override;
  std::variant<Rational, double> correlate(const Lhs& lhs, Rhs rhs) override;
  bool detect(const Lhs& lhs) override;
  Rational coefficient(const Monomial& g) override;
  bool residual_zero() override;
  void probe_all() override;

  Rational correlate_exact(const Lhs& lhs, Rhs rhs);

 private:
  void charge(const Lhs& lhs);

  Polynomial target_;
  Polynomial hypothesis_;
  Polynomial residual_;
  Polynomial residual_sq_;
  GridDataset* data_;
};

struct SampledOracleOptions {
  double tau = 1e-6;         // positivity threshold
  double z = 4.0;            // standard errors added to tau in the detection test
  double a_min = 0.25;       // coefficient floor
  std::uint64_t max_denominator = 64;  // rationalization of coefficient estimates
};

class SampledCorrelationOracle final : public CorrelationOracle {
 public:
  SampledCorrelationOracle(GridDataset& data, const OrthogonalBasis& basis, SampledOracleOptions opts = {});

  void set_hypothesis(const Polynomial& g_tilde) override;
  std::variant<Rational, double> correlate(const Lhs& lhs, Rhs rhs) override;
  bool detect(const Lhs& lhs) override;
  Rational coefficient(const Monomial& g) override;
  bool residual_zero() override;
  void probe_all() override;

  struct Estimate {
    double mean;
    double std_error;
  };
  Estimate estimate(const Lhs& lhs, Rhs rhs);

 private:
  GridDataset& data_;
  SampledOracleOptions opts_;
  std::vector<double> residual_;
};

// Powers for `features` (in order) of the lexicographically largest residual monomial
// restricted to those features.
std::vector<unsigned> lex_search(CorrelationOracle& oracle, const std::vector<Feature>& features, unsigned d);

Polynomial learn_polynomial_scratch(CorrelationOracle& oracle, unsigned d, unsigned t);

enum class PolynomialFailure {
  empty_representation,
  degree_exceeded,
  not_natural,
  zero_coefficient,
  verification_mismatch
};

struct PolynomialLearned {
  Polynomial G;
};
struct PolynomialFailed {
  PolynomialFailure reason;
};
using PolynomialOutcome = std::variant<PolynomialLearned, PolynomialFailed>;

PolynomialOutcome lfd_polynomial(CorrelationOracle& oracle, GridDataset& verify, const RepresentationMatrix& rep,
                                 unsigned d, unsigned t);

RepresentationMatrix improve_rep_polynomial(RepresentationMatrix rep, const Polynomial& G);

PolynomialOutcome naive_lfd_seen_polynomial(CorrelationOracle& oracle, GridDataset& verify,
                                            const std::set<Feature>& seen, unsigned d, unsigned t);

nlohmann::json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const nlohmann::json& j, std::size_t n);

}  // namespace lifelong
