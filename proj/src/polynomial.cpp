#include "lifelong/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace lifelong {

void Polynomial::add_term(const Monomial& g, const Rational& coeff) {
  if (g.size() != n_) throw UsageError("monomial length does not match the polynomial");
  if (sgn(coeff) == 0) return;
  auto [it, inserted] = terms_.emplace(g, coeff);
  if (!inserted) {
    it->second += coeff;
    if (sgn(it->second) == 0) terms_.erase(it);
  }
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const auto& [g, c] : terms_) d = std::max(d, g.degree());
  return d;
}

std::vector<Feature> Polynomial::support() const {
  std::set<Feature> s;
  for (const auto& [g, c] : terms_)
    for (Feature i : g.support()) s.insert(i);
  return {s.begin(), s.end()};
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  if (o.n_ != n_) throw UsageError("polynomials over different feature counts");
  Polynomial r = *this;
  for (const auto& [g, c] : o.terms_) r.add_term(g, c);
  return r;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  if (o.n_ != n_) throw UsageError("polynomials over different feature counts");
  Polynomial r = *this;
  for (const auto& [g, c] : o.terms_) r.add_term(g, -c);
  return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  if (o.n_ != n_) throw UsageError("polynomials over different feature counts");
  Polynomial r(n_);
  for (const auto& [g, a] : terms_)
    for (const auto& [h, b] : o.terms_) {
      Monomial gh(n_);
      for (std::size_t i = 0; i < n_; ++i) gh.exponents[i] = g.exponents[i] + h.exponents[i];
      r.add_term(gh, a * b);
    }
  return r;
}

Rational Polynomial::evaluate_on_grid(std::span<const std::uint64_t> row, std::uint64_t den) const {
  Rational total = 0;
  for (const auto& [g, c] : terms_) total += c * lifelong::evaluate_on_grid(g, row, den);
  return total;
}

Rational Polynomial::evaluate(GridDataset& ds, std::size_t example) const {
  Rational total = 0;
  for (const auto& [g, c] : terms_) total += c * lifelong::evaluate(g, ds, example);
  return total;
}

double Polynomial::evaluate_double(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& [g, c] : terms_) {
    double v = c.get_d();
    for (Feature i : g.support()) v *= std::pow(x[i], static_cast<double>(g.exponents[i]));
    total += v;
  }
  return total;
}

OrthogonalBasis::OrthogonalBasis(const ProductDistribution& dist, unsigned d) : dist_(dist) {
  const unsigned top = 2 * d;
  auto expect_product = [&](const std::vector<Rational>& p, const std::vector<Rational>& q) {
    Rational total = 0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (sgn(p[a]) == 0) continue;
      for (std::size_t b = 0; b < q.size(); ++b)
        if (sgn(q[b]) != 0) total += p[a] * q[b] * dist_.moment(static_cast<unsigned>(a + b));
    }
    return total;
  };
  for (unsigned k = 0; k <= top; ++k) {
    std::vector<Rational> h(k + 1);
    h[k] = 1;
    std::vector<Rational> xk = h;
    for (unsigned j = 0; j < k; ++j) {
      Rational proj = expect_product(xk, coeffs_[j]) / norms_[j];
      for (std::size_t a = 0; a < coeffs_[j].size(); ++a) h[a] -= proj * coeffs_[j][a];
    }
    Rational n = expect_product(h, h);
    if (sgn(n) <= 0) throw ModelViolationError("degenerate marginal: orthogonal polynomial has zero norm");
    coeffs_.push_back(h);
    norms_.push_back(n);
    std::vector<double> hd;
    for (const auto& c : h) hd.push_back(c.get_d());
    coeffs_d_.push_back(std::move(hd));
  }
  cross_.assign(top + 1, std::vector<Rational>(top + 1));
  for (unsigned k = 0; k <= top; ++k)
    for (unsigned e = 0; e <= top; ++e) {
      Rational total = 0;
      for (std::size_t a = 0; a < coeffs_[k].size(); ++a)
        total += coeffs_[k][a] * dist_.moment(static_cast<unsigned>(a + e));
      cross_[k][e] = total;
    }
}

Rational OrthogonalBasis::inner(unsigned j, unsigned k) const {
  Rational total = 0;
  const auto& p = coeffs_.at(j);
  const auto& q = coeffs_.at(k);
  for (std::size_t a = 0; a < p.size(); ++a)
    for (std::size_t b = 0; b < q.size(); ++b) total += p[a] * q[b] * dist_.moment(static_cast<unsigned>(a + b));
  return total;
}

const Rational& OrthogonalBasis::cross(unsigned k, unsigned e) const {
  if (k >= cross_.size() || e >= cross_.size()) throw UsageError("basis degree out of range");
  return cross_[k][e];
}

double OrthogonalBasis::evaluate(unsigned k, double x) const {
  const auto& c = coeffs_d_.at(k);
  double v = 0.0;
  for (std::size_t a = c.size(); a-- > 0;) v = v * x + c[a];
  return v;
}

OrthogonalBasis build_orthogonal_basis(const ProductDistribution& dist, unsigned d) {
  return OrthogonalBasis(dist, d);
}

ExactCorrelationOracle::ExactCorrelationOracle(Polynomial target, const OrthogonalBasis& basis,
                                               GridDataset* charge)
    : CorrelationOracle(basis, target.num_features()),
      target_(std::move(target)),
      hypothesis_(n_),
      data_(charge) {
  if (data_ && data_->num_features() != n_) throw UsageError("oracle dataset has a different feature count");
  set_hypothesis(Polynomial(n_));
}

void ExactCorrelationOracle::set_hypothesis(const Polynomial& g_tilde) {
  hypothesis_ = g_tilde;
  residual_ = target_ - hypothesis_;
  residual_sq_ = residual_ * residual_;
}

void ExactCorrelationOracle::charge(const Lhs& lhs) {
  if (!data_) return;
  auto extra = hypothesis_.support();
  for (std::size_t e = 0; e < data_->num_examples(); ++e) {
    for (const auto& f : lhs) data_->probe(e, f.var);
    for (Feature i : extra) data_->probe(e, i);
  }
}

Rational ExactCorrelationOracle::correlate_exact(const Lhs& lhs, Rhs rhs) {
  charge(lhs);
  const Polynomial& p = rhs == Rhs::residual ? residual_ : residual_sq_;
  const auto& dist = basis_.distribution();
  Rational total = 0;
  for (const auto& [h, c] : p.terms()) {
    Rational prod = c;
    for (const auto& f : lhs) {
      prod *= basis_.cross(f.degree, h.exponents[f.var]);
      if (sgn(prod) == 0) break;
    }
    if (sgn(prod) == 0) continue;
    for (Feature v : h.support()) {
      bool in_lhs = std::any_of(lhs.begin(), lhs.end(), [&](const LhsFactor& f) { return f.var == v; });
      if (!in_lhs) prod *= dist.moment(h.exponents[v]);
    }
    total += prod;
  }
  return total;
}

std::variant<Rational, double> ExactCorrelationOracle::correlate(const Lhs& lhs, Rhs rhs) {
  return correlate_exact(lhs, rhs);
}

bool ExactCorrelationOracle::detect(const Lhs& lhs) { return sgn(correlate_exact(lhs, Rhs::residual_squared)) > 0; }

Rational ExactCorrelationOracle::coefficient(const Monomial& g) {
  Lhs lhs;
  Rational scale = 1;
  for (Feature i : g.support()) {
    lhs.push_back({i, g.exponents[i]});
    scale *= basis_.norm(g.exponents[i]);
  }
  return correlate_exact(lhs, Rhs::residual) / scale;
}

bool ExactCorrelationOracle::residual_zero() {
  charge({});
  return residual_.zero();
}

void ExactCorrelationOracle::probe_all() {
  if (data_) data_->probe_all();
}

SampledCorrelationOracle::SampledCorrelationOracle(GridDataset& data, const OrthogonalBasis& basis,
                                                   SampledOracleOptions opts)
    : CorrelationOracle(basis, data.num_features()), data_(data), opts_(opts) {
  set_hypothesis(Polynomial(n_));
}

void SampledCorrelationOracle::set_hypothesis(const Polynomial& g_tilde) {
  residual_.assign(data_.num_examples(), 0.0);
  std::vector<double> x(n_, 0.0);
  auto support = g_tilde.support();
  const double den = static_cast<double>(data_.denominator());
  for (std::size_t e = 0; e < data_.num_examples(); ++e) {
    for (Feature i : support) x[i] = static_cast<double>(data_.probe(e, i)) / den;
    residual_[e] = data_.label(e).get_d() - g_tilde.evaluate_double(x);
  }
}

SampledCorrelationOracle::Estimate SampledCorrelationOracle::estimate(const Lhs& lhs, Rhs rhs) {
  const std::size_t S = data_.num_examples();
  const double den = static_cast<double>(data_.denominator());
  long double sum = 0, sum_sq = 0;
  for (std::size_t e = 0; e < S; ++e) {
    double v = rhs == Rhs::residual ? residual_[e] : residual_[e] * residual_[e];
    for (const auto& f : lhs) v *= basis_.evaluate(f.degree, static_cast<double>(data_.probe(e, f.var)) / den);
    sum += v;
    sum_sq += static_cast<long double>(v) * v;
  }
  long double mean = sum / S;
  long double var = S > 1 ? std::max<long double>(0, (sum_sq - S * mean * mean) / (S - 1)) : 0;
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / S))};
}

std::variant<Rational, double> SampledCorrelationOracle::correlate(const Lhs& lhs, Rhs rhs) {
  return estimate(lhs, rhs).mean;
}

bool SampledCorrelationOracle::detect(const Lhs& lhs) {
  auto est = estimate(lhs, Rhs::residual_squared);
  return est.mean > opts_.tau + opts_.z * est.std_error;
}

Rational SampledCorrelationOracle::coefficient(const Monomial& g) {
  Lhs lhs;
  double scale = 1.0;
  for (Feature i : g.support()) {
    lhs.push_back({i, g.exponents[i]});
    scale *= basis_.norm(g.exponents[i]).get_d();
  }
  auto est = estimate(lhs, Rhs::residual);
  double a = est.mean / scale;
  if (std::abs(a) < opts_.a_min) return 0;
  double half = opts_.z * est.std_error / scale;
  if (auto r = simplest_fraction(a - half, a + half, opts_.max_denominator)) return *r;
  return nearest_fraction(a, opts_.max_denominator);
}

bool SampledCorrelationOracle::residual_zero() { return estimate({}, Rhs::residual_squared).mean <= opts_.tau; }

void SampledCorrelationOracle::probe_all() { data_.probe_all(); }

std::vector<unsigned> lex_search(CorrelationOracle& oracle, const std::vector<Feature>& features, unsigned d) {
  std::vector<unsigned> powers(features.size(), 0);
  Lhs prefix;
  unsigned budget = d;
  for (std::size_t idx = 0; idx < features.size() && budget > 0; ++idx) {
    Feature i = features[idx];
    for (unsigned p = budget; p >= 1; --p) {
      Lhs test = prefix;
      test.push_back({i, 2 * p});
      if (oracle.detect(test)) {
        powers[idx] = p;
        break;
      }
    }
    if (powers[idx]) {
      prefix.push_back({i, 2 * powers[idx]});
      budget -= powers[idx];
    }
  }
  return powers;
}

Polynomial learn_polynomial_scratch(CorrelationOracle& oracle, unsigned d, unsigned t) {
  const std::size_t N = oracle.num_features();
  oracle.probe_all();
  std::vector<Feature> all(N);
  for (Feature i = 0; i < N; ++i) all[i] = i;
  Polynomial G(N);
  for (unsigned it = 0; it < t; ++it) {
    oracle.set_hypothesis(G);
    if (oracle.residual_zero()) return G;
    auto powers = lex_search(oracle, all, d);
    Monomial g(std::vector<std::uint32_t>(powers.begin(), powers.end()));
    Rational a = oracle.coefficient(g);
    if (sgn(a) == 0) break;
    G.add_term(g, a);
  }
  oracle.set_hypothesis(G);
  if (!oracle.residual_zero()) throw SparsityViolationError("residual remains after t extractions");
  return G;
}

namespace {

PolynomialOutcome verify_polynomial(const Polynomial& G, GridDataset& verify) {
  if (G.evaluate(verify, 0) != verify.label(0)) return PolynomialFailed{PolynomialFailure::verification_mismatch};
  return PolynomialLearned{G};
}

}  // namespace

PolynomialOutcome lfd_polynomial(CorrelationOracle& oracle, GridDataset& verify, const RepresentationMatrix& rep,
                                 unsigned d, unsigned t) {
  if (rep.empty()) return PolynomialFailed{PolynomialFailure::empty_representation};
  const std::size_t N = oracle.num_features();
  std::vector<Feature> I;
  for (std::size_t r : rep.independent_rows()) I.push_back(static_cast<Feature>(r));
  Polynomial G(N);
  for (unsigned it = 0; it < t; ++it) {
    oracle.set_hypothesis(G);
    if (oracle.residual_zero()) break;
    auto powers = lex_search(oracle, I, d);
    std::vector<Rational> gI(powers.begin(), powers.end());
    auto g = as_natural(rep.combine(rep.solve(gI)));
    if (!g) return PolynomialFailed{PolynomialFailure::not_natural};
    if (g->degree() > d) return PolynomialFailed{PolynomialFailure::degree_exceeded};
    Rational a = oracle.coefficient(*g);
    if (sgn(a) == 0) return PolynomialFailed{PolynomialFailure::zero_coefficient};
    G.add_term(*g, a);
  }
  return verify_polynomial(G, verify);
}

RepresentationMatrix improve_rep_polynomial(RepresentationMatrix rep, const Polynomial& G) {
  for (const auto& [g, c] : G.terms())
    if (!rep.in_span(g)) rep.insert(g);
  return rep;
}

PolynomialOutcome naive_lfd_seen_polynomial(CorrelationOracle& oracle, GridDataset& verify,
                                            const std::set<Feature>& seen, unsigned d, unsigned t) {
  const std::size_t N = oracle.num_features();
  std::vector<Feature> pool(seen.begin(), seen.end());
  Polynomial G(N);
  for (unsigned it = 0; it < t; ++it) {
    oracle.set_hypothesis(G);
    if (oracle.residual_zero()) break;
    auto powers = lex_search(oracle, pool, d);
    Monomial g(N);
    for (std::size_t k = 0; k < pool.size(); ++k) g.exponents[pool[k]] = powers[k];
    Rational a = oracle.coefficient(g);
    if (sgn(a) == 0) return PolynomialFailed{PolynomialFailure::zero_coefficient};
    G.add_term(g, a);
  }
  return verify_polynomial(G, verify);
}

nlohmann::json to_json(const Polynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [g, c] : p.terms()) terms.push_back({{"monomial", to_json(g)}, {"coeff", to_string(c)}});
  return {{"terms", std::move(terms)}};
}

Polynomial polynomial_from_json(const nlohmann::json& j, std::size_t n) {
  if (!j.is_object() || !j.contains("terms")) throw UsageError("polynomial JSON needs a terms array");
  Polynomial p(n);
  for (const auto& t : j.at("terms")) {
    Monomial g = monomial_from_json(t.at("monomial"), n);
    if (p.terms().contains(g)) throw UsageError("polynomial JSON repeats a monomial");
    p.add_term(g, parse_rational(t.at("coeff").get<std::string>()));
  }
  return p;
}

}  // namespace lifelong
