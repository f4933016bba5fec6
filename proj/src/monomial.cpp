#include "lifelong/monomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace lifelong {

Monomial Monomial::unit(std::size_t n, Feature i, std::uint32_t power) {
  if (i >= n) throw UsageError("feature index out of range");
  Monomial g(n);
  g.exponents[i] = power;
  return g;
}

unsigned Monomial::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0u); }

std::vector<Feature> Monomial::support() const {
  std::vector<Feature> out;
  for (Feature i = 0; i < exponents.size(); ++i)
    if (exponents[i]) out.push_back(i);
  return out;
}

Rational evaluate_on_grid(const Monomial& g, std::span<const std::uint64_t> row, std::uint64_t den) {
  if (row.size() != g.size()) throw UsageError("row length does not match the monomial");
  BigInt num = 1, term;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!g.exponents[i]) continue;
    mpz_ui_pow_ui(term.get_mpz_t(), row[i], g.exponents[i]);
    num *= term;
  }
  BigInt d;
  mpz_ui_pow_ui(d.get_mpz_t(), den, g.degree());
  Rational q(num, d);
  q.canonicalize();
  return q;
}

Rational evaluate(const Monomial& g, GridDataset& ds, std::size_t example) {
  if (g.size() != ds.num_features()) throw UsageError("monomial length does not match the dataset");
  BigInt num = 1, term;
  for (Feature i : g.support()) {
    mpz_ui_pow_ui(term.get_mpz_t(), ds.probe(example, i), g.exponents[i]);
    num *= term;
  }
  BigInt d;
  mpz_ui_pow_ui(d.get_mpz_t(), ds.denominator(), g.degree());
  Rational q(num, d);
  q.canonicalize();
  return q;
}

BigInt power_sum(const BigInt& n, unsigned j) {
  // (n+1)^(j+1) - 1 = sum_{i<=j} C(j+1, i) P_i(n), solved upward from P_0(n) = n.
  std::vector<BigInt> P(j + 1);
  P[0] = n;
  for (unsigned a = 1; a <= j; ++a) {
    BigInt acc;
    BigInt n1 = n + 1;
    mpz_pow_ui(acc.get_mpz_t(), n1.get_mpz_t(), a + 1);
    acc -= 1;
    BigInt binom;
    for (unsigned i = 0; i < a; ++i) {
      mpz_bin_uiui(binom.get_mpz_t(), a + 1, i);
      acc -= binom * P[i];
    }
    P[a] = acc / (a + 1);
  }
  return P[j];
}

namespace {

struct LogMoments {
  double mean;
  double mean_sq;
};

LogMoments grid_log_moments(unsigned log2_den) {
  static std::mutex mu;
  static std::map<unsigned, LogMoments> cache;
  std::lock_guard<std::mutex> lock(mu);
  if (auto it = cache.find(log2_den); it != cache.end()) return it->second;
  const long double M = std::ldexp(1.0L, static_cast<int>(log2_den));
  const long double ln2 = std::log(2.0L);
  long double s1 = 0, s2 = 0;
  if (log2_den <= 16) {
    for (long double j = 0; j <= M; j += 1) {
      long double l = std::log2(1.0L + j / M);
      s1 += l;
      s2 += l * l;
    }
  } else {
    // Euler-Maclaurin with the first derivative correction; remainder O(1/M^3).
    long double I1 = 2.0L - 1.0L / ln2;
    long double I2 = (2 * ln2 * ln2 - 4 * ln2 + 2) / (ln2 * ln2);
    s1 = M * I1 + 0.5L + (1.0L / (ln2 * 2 * M) - 1.0L / (ln2 * M)) / 12.0L;
    s2 = M * I2 + 0.5L + (1.0L / (ln2 * M)) / 12.0L;
  }
  LogMoments lm{static_cast<double>(s1 / (M + 1)), static_cast<double>(s2 / (M + 1))};
  cache.emplace(log2_den, lm);
  return lm;
}

}  // namespace

ProductDistribution ProductDistribution::grid_uniform(unsigned log2_denominator) {
  if (log2_denominator > 40) throw SpecError("grid resolution above 2^40 is not supported");
  ProductDistribution d;
  d.kind_ = Kind::grid_uniform;
  d.log2_den_ = log2_denominator;
  auto lm = grid_log_moments(log2_denominator);
  d.mean_log2_ = lm.mean;
  d.mean_log2_sq_ = lm.mean_sq;
  d.extend_moments(24);
  return d;
}

ProductDistribution ProductDistribution::continuous_uniform() {
  ProductDistribution d;
  d.kind_ = Kind::continuous_uniform;
  const double ln2 = std::log(2.0);
  d.mean_log2_ = 2.0 - 1.0 / ln2;
  d.mean_log2_sq_ = (2 * ln2 * ln2 - 4 * ln2 + 2) / (ln2 * ln2);
  d.extend_moments(24);
  return d;
}

std::uint64_t ProductDistribution::denominator() const {
  if (kind_ != Kind::grid_uniform) throw UsageError("continuous distribution has no grid");
  return std::uint64_t{1} << log2_den_;
}

void ProductDistribution::extend_moments(unsigned j) const {
  while (moments_.size() <= j) {
    unsigned k = static_cast<unsigned>(moments_.size());
    if (kind_ == Kind::continuous_uniform) {
      BigInt num;
      mpz_ui_pow_ui(num.get_mpz_t(), 2, k + 1);
      Rational q(num - 1, BigInt(k + 1));
      q.canonicalize();
      moments_.push_back(q);
    } else {
      BigInt M = BigInt(1) << log2_den_;
      BigInt top = power_sum(2 * M, k);
      BigInt bottom = power_sum(M - 1, k);
      BigInt den;
      mpz_pow_ui(den.get_mpz_t(), M.get_mpz_t(), k);
      den *= (M + 1);
      Rational q(top - bottom, den);
      q.canonicalize();
      moments_.push_back(q);
    }
  }
}

const Rational& ProductDistribution::moment(unsigned j) const {
  if (j >= moments_.size()) throw UsageError("moment order beyond the precomputed table");
  return moments_[j];
}

std::uint64_t ProductDistribution::sample(std::mt19937_64& rng) const {
  std::uint64_t M = denominator();
  std::uniform_int_distribution<std::uint64_t> pick(0, M);
  return M + pick(rng);
}

std::size_t exact_rank(const std::vector<std::vector<Rational>>& columns) {
  if (columns.empty()) return 0;
  std::size_t n = columns.front().size();
  // Row-reduce the transpose: each column is a row here.
  std::vector<std::vector<Rational>> m = columns;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n && rank < m.size(); ++c) {
    std::size_t piv = rank;
    while (piv < m.size() && sgn(m[piv][c]) == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[piv], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || sgn(m[r][c]) == 0) continue;
      Rational f = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

namespace {

std::vector<Rational> to_rationals(const Monomial& g) {
  std::vector<Rational> v;
  v.reserve(g.size());
  for (auto e : g.exponents) v.emplace_back(e);
  return v;
}

}  // namespace

bool RepresentationMatrix::in_span(const Monomial& g) const {
  if (g.size() != n_rows_) throw UsageError("monomial length does not match the representation");
  std::vector<std::vector<Rational>> cols;
  for (const auto& c : columns_) cols.push_back(to_rationals(c));
  cols.push_back(to_rationals(g));
  return exact_rank(cols) == columns_.size();
}

void RepresentationMatrix::insert(const Monomial& g) {
  if (in_span(g)) throw InternalConsistencyError("column is linearly dependent on the representation");
  columns_.push_back(g);
  refresh();
}

void RepresentationMatrix::clear() {
  columns_.clear();
  rows_I_.clear();
  inverse_.clear();
}

void RepresentationMatrix::refresh() {
  const std::size_t k = columns_.size();
  // Lowest-index rows that extend the row space, kept in reduced form.
  rows_I_.clear();
  std::vector<std::vector<Rational>> basis;
  std::vector<std::size_t> pivots;
  for (std::size_t r = 0; r < n_rows_ && rows_I_.size() < k; ++r) {
    std::vector<Rational> row(k);
    for (std::size_t c = 0; c < k; ++c) row[c] = columns_[c].exponents[r];
    for (std::size_t b = 0; b < basis.size(); ++b) {
      if (sgn(row[pivots[b]]) == 0) continue;
      Rational f = row[pivots[b]] / basis[b][pivots[b]];
      for (std::size_t c = 0; c < k; ++c) row[c] -= f * basis[b][c];
    }
    auto nz = std::find_if(row.begin(), row.end(), [](const Rational& x) { return sgn(x) != 0; });
    if (nz == row.end()) continue;
    pivots.push_back(static_cast<std::size_t>(nz - row.begin()));
    basis.push_back(std::move(row));
    rows_I_.push_back(r);
  }
  if (rows_I_.size() != k) throw InternalConsistencyError("representation matrix is rank deficient");
  // Gauss-Jordan inverse of F[I].
  std::vector<std::vector<Rational>> a(k, std::vector<Rational>(2 * k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < k; ++c) a[i][c] = columns_[c].exponents[rows_I_[i]];
    a[i][k + i] = 1;
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    while (piv < k && sgn(a[piv][c]) == 0) ++piv;
    if (piv == k) throw InternalConsistencyError("selected rows are singular");
    std::swap(a[piv], a[c]);
    Rational inv = 1 / a[c][c];
    for (auto& x : a[c]) x *= inv;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c || sgn(a[r][c]) == 0) continue;
      Rational f = a[r][c];
      for (std::size_t q = 0; q < 2 * k; ++q) a[r][q] -= f * a[c][q];
    }
  }
  inverse_.assign(k, std::vector<Rational>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) inverse_[i][j] = a[i][k + j];
}

std::vector<Rational> RepresentationMatrix::solve(const std::vector<Rational>& values) const {
  const std::size_t k = columns_.size();
  if (values.size() != k) throw UsageError("right-hand side has the wrong length");
  std::vector<Rational> w(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) w[i] += inverse_[i][j] * values[j];
  return w;
}

std::vector<Rational> RepresentationMatrix::combine(const std::vector<Rational>& w) const {
  if (w.size() != columns_.size()) throw UsageError("weight vector has the wrong length");
  std::vector<Rational> g(n_rows_);
  for (std::size_t c = 0; c < w.size(); ++c) {
    if (sgn(w[c]) == 0) continue;
    for (std::size_t r = 0; r < n_rows_; ++r)
      if (columns_[c].exponents[r]) g[r] += w[c] * columns_[c].exponents[r];
  }
  return g;
}

std::vector<std::size_t> independent_rows(const RepresentationMatrix& rep) {
  if (rep.empty()) throw UsageError("independent rows of an empty representation");
  return rep.independent_rows();
}

unsigned estimate_power(GridDataset& ds, Feature i, const ProductDistribution& dist, const PowerEstimator& est) {
  if (i >= ds.num_features()) throw UsageError("feature index out of range");
  const std::size_t S = ds.num_examples();
  double ratio = 0.0;
  if (est.mode == EstimationMode::exact) {
    if (!est.truth || est.truth->size() != ds.num_features())
      throw UsageError("exact estimation needs the target over the same features");
    for (std::size_t e = 0; e < S; ++e) ds.probe(e, i);
    // <Q_g, log x_i - E log x_i> = sum_j g_j Cov(log x_j, log x_i) under independence.
    const double mu = dist.mean_log2();
    double numerator = 0.0;
    for (Feature j = 0; j < est.truth->size(); ++j) {
      double cov = j == i ? dist.mean_log2_sq() - mu * mu : mu * mu - mu * mu;
      numerator += static_cast<double>(est.truth->exponents[j]) * cov;
    }
    ratio = numerator / dist.var_log2();
  } else {
    std::vector<double> l(S);
    long double sum = 0, sum_sq = 0;
    for (std::size_t e = 0; e < S; ++e) {
      l[e] = ds.probe_log2(e, i);
      sum += l[e];
      sum_sq += static_cast<long double>(l[e]) * l[e];
    }
    long double mean = sum / S;
    long double denom = sum_sq / S - mean * mean;
    if (denom < dist.var_log2() / 2) throw VarianceUnderflowError("empirical log-variance below c/2");
    long double numerator = 0;
    for (std::size_t e = 0; e < S; ++e) numerator += log2_of(ds.label(e)) * (l[e] - mean);
    ratio = static_cast<double>(numerator / S / denom);
  }
  long long r = std::llround(ratio);
  return r < 0 ? 0u : static_cast<unsigned>(r);
}

std::size_t sampled_sample_size(unsigned d, double c, std::size_t N, std::size_t m, double delta,
                                double constant) {
  if (d == 0 || c <= 0 || N == 0 || m == 0 || !(delta > 0 && delta < 1))
    throw SpecError("sample-size inputs out of range");
  double dd = d;
  double inner = std::min({c * c / dd, c / dd, 1.0});
  double S = constant * (dd / (inner * inner)) * std::log(static_cast<double>(N) * m / delta);
  return static_cast<std::size_t>(std::ceil(S));
}

Monomial learn_monomial_scratch(GridDataset& ds, const ProductDistribution& dist, unsigned d,
                                const PowerEstimator& est) {
  ds.probe_all();
  Monomial g(ds.num_features());
  for (Feature i = 0; i < ds.num_features(); ++i) g.exponents[i] = estimate_power(ds, i, dist, est);
  if (g.degree() > d) throw ModelViolationError("estimated monomial exceeds the degree bound");
  return g;
}

std::optional<Monomial> as_natural(const std::vector<Rational>& v) {
  Monomial g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (sgn(v[i]) < 0 || v[i].get_den() != 1 || !v[i].get_num().fits_uint_p()) return std::nullopt;
    g.exponents[i] = static_cast<std::uint32_t>(v[i].get_num().get_ui());
  }
  return g;
}

namespace {

MonomialOutcome verify_candidate(const Monomial& g, GridDataset& verify, unsigned d) {
  if (g.degree() > d) return MonomialFailed{MonomialFailure::degree_exceeded};
  if (evaluate(g, verify, 0) != verify.label(0)) return MonomialFailed{MonomialFailure::verification_mismatch};
  return MonomialLearned{g};
}

}  // namespace

MonomialOutcome lfd_monomial(GridDataset& ds, GridDataset& verify, const RepresentationMatrix& rep,
                             const ProductDistribution& dist, unsigned d, const PowerEstimator& est) {
  if (rep.empty()) return MonomialFailed{MonomialFailure::empty_representation};
  const auto& I = rep.independent_rows();
  std::vector<Rational> gI;
  for (std::size_t r : I) gI.emplace_back(estimate_power(ds, static_cast<Feature>(r), dist, est));
  auto g = as_natural(rep.combine(rep.solve(gI)));
  if (!g) return MonomialFailed{MonomialFailure::not_natural};
  return verify_candidate(*g, verify, d);
}

RepresentationMatrix improve_rep_monomial(RepresentationMatrix rep, const Monomial& g) {
  if (rep.in_span(g))
    throw InternalConsistencyError("target already in the span: verification passed a wrong hypothesis");
  rep.insert(g);
  return rep;
}

MonomialOutcome naive_lfd_seen_monomial(GridDataset& ds, GridDataset& verify, const std::set<Feature>& seen,
                                        const ProductDistribution& dist, unsigned d, const PowerEstimator& est) {
  Monomial g(ds.num_features());
  for (Feature i : seen) g.exponents.at(i) = estimate_power(ds, i, dist, est);
  return verify_candidate(g, verify, d);
}

nlohmann::json to_json(const Monomial& g) {
  nlohmann::json j = nlohmann::json::object();
  for (Feature i : g.support()) j[std::to_string(i)] = g.exponents[i];
  return j;
}

Monomial monomial_from_json(const nlohmann::json& j, std::size_t n) {
  if (!j.is_object()) throw UsageError("monomial must be a JSON object");
  Monomial g(n);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::size_t i = 0;
    try {
      i = std::stoul(it.key());
    } catch (const std::exception&) {
      throw UsageError("monomial key '" + it.key() + "' is not a feature index");
    }
    if (i >= n) throw UsageError("monomial feature index out of range");
    g.exponents[i] = it.value().get<std::uint32_t>();
  }
  return g;
}

}  // namespace lifelong
