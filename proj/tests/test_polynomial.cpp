#include <cmath>
#include <random>

#include "doctest.h"
#include "lifelong/monomial.hpp"
#include "lifelong/polynomial.hpp"
#include "lifelong/streams.hpp"

using namespace lifelong;

namespace {

Monomial mono(std::vector<std::uint32_t> e) { return Monomial(std::move(e)); }

Polynomial poly(std::size_t n, std::initializer_list<std::pair<Monomial, Rational>> terms) {
  Polynomial p(n);
  for (const auto& [g, c] : terms) p.add_term(g, c);
  return p;
}

GridDataset data_for(const Polynomial& G, std::size_t S, const ProductDistribution& dist, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return make_grid_dataset(
      G.num_features(), S, dist,
      [&](std::span<const std::uint64_t> row, std::uint64_t den) { return G.evaluate_on_grid(row, den); }, rng);
}

RepresentationMatrix rep_of(std::size_t n, const std::vector<Monomial>& cols) {
  RepresentationMatrix rep(n);
  for (const auto& c : cols) rep.insert(c);
  return rep;
}

Polynomial random_polynomial(std::size_t N, unsigned d, unsigned t, std::mt19937_64& rng) {
  Polynomial G(N);
  while (G.sparsity() < t) {
    Monomial g(N);
    unsigned deg = 1 + static_cast<unsigned>(rng() % d);
    for (unsigned k = 0; k < deg; ++k) ++g.exponents[rng() % N];
    if (G.terms().contains(g)) continue;
    long num = static_cast<long>(1 + rng() % 9) * ((rng() & 1) ? 1 : -1);
    long den = 1 + static_cast<long>(rng() % 4);
    Rational c(num, den);
    c.canonicalize();
    G.add_term(g, c);
  }
  return G;
}

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0);
  w.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    w[i] = 2 / ((1 - z * z) * dp * dp);
  }
}

// Orthonormal polynomials for uniform [1, 2] by floating Gram-Schmidt under quadrature.
struct FloatOrthonormal {
  std::vector<double> nodes, weights;  // on [1, 2], weights sum to 1
  std::vector<std::vector<double>> values;  // values[k][q] = H_k(nodes[q])

  FloatOrthonormal(unsigned top, int points) {
    std::vector<double> x, w;
    gauss_legendre(points, x, w);
    for (int q = 0; q < points; ++q) {
      nodes.push_back(1.5 + x[q] / 2);
      weights.push_back(w[q] / 2);
    }
    for (unsigned k = 0; k <= top; ++k) {
      std::vector<double> h(nodes.size());
      for (std::size_t q = 0; q < nodes.size(); ++q) h[q] = std::pow(nodes[q], k);
      for (unsigned j = 0; j < k; ++j) {
        double proj = 0;
        for (std::size_t q = 0; q < nodes.size(); ++q) proj += weights[q] * h[q] * values[j][q];
        for (std::size_t q = 0; q < nodes.size(); ++q) h[q] -= proj * values[j][q];
      }
      double norm = 0;
      for (std::size_t q = 0; q < nodes.size(); ++q) norm += weights[q] * h[q] * h[q];
      for (auto& v : h) v /= std::sqrt(norm);
      values.push_back(h);
    }
  }
};

}  // namespace

TEST_CASE("polynomial arithmetic") {
  auto x0 = Monomial::unit(2, 0), x1 = Monomial::unit(2, 1);
  auto p = poly(2, {{x0, 2}, {x1, Rational(-1, 2)}});
  CHECK(p.sparsity() == 2);
  CHECK(p.degree() == 1);
  CHECK(p.support() == std::vector<Feature>{0, 1});
  auto q = p - poly(2, {{x0, 2}});
  CHECK(q.sparsity() == 1);
  p.add_term(x1, Rational(1, 2));
  CHECK(p == poly(2, {{x0, 2}}));
  p.add_term(x0, 0);
  CHECK(p.sparsity() == 1);
  auto sq = (poly(2, {{x0, 1}, {x1, 1}})) * (poly(2, {{x0, 1}, {x1, -1}}));
  CHECK(sq == poly(2, {{mono({2, 0}), 1}, {mono({0, 2}), -1}}));
  const std::vector<std::uint64_t> row{6, 8};
  CHECK(sq.evaluate_on_grid(row, 4) == Rational(9, 4) - 4);
  const std::vector<double> xd{1.5, 2.0};
  CHECK(sq.evaluate_double(xd) == doctest::Approx(2.25 - 4.0));
  CHECK_THROWS_AS(p.add_term(Monomial::unit(3, 0), 1), UsageError);
  CHECK_THROWS_AS(p + Polynomial(3), UsageError);
  // lexicographically largest monomial is last
  auto lex = poly(2, {{mono({1, 1}), 1}, {mono({2, 0}), 1}, {mono({0, 3}), 1}});
  CHECK(lex.terms().rbegin()->first == mono({2, 0}));
}

TEST_CASE("orthogonal basis") {
  auto cont = ProductDistribution::continuous_uniform();
  OrthogonalBasis b(cont, 2);
  CHECK(b.max_degree() == 4);
  CHECK(b.coefficients(0) == std::vector<Rational>{1});
  CHECK(b.norm(0) == 1);
  CHECK(b.coefficients(1) == std::vector<Rational>{Rational(-3, 2), 1});
  CHECK(b.norm(1) == Rational(1, 12));
  // shifted monic Legendre: (x - 3/2)^2 - 1/12
  CHECK(b.coefficients(2) == std::vector<Rational>{Rational(9, 4) - Rational(1, 12), -3, 1});
  CHECK(b.norm(2) == Rational(1, 180));
  for (unsigned k = 0; k <= 4; ++k) CHECK(b.coefficients(k).back() == 1);
  CHECK(b.evaluate(1, 2.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(b.cross(5, 0), UsageError);

  auto grid = ProductDistribution::grid_uniform(20);
  OrthogonalBasis g(grid, 4);
  CHECK(g.coefficients(1) == std::vector<Rational>{-grid.moment(1), 1});
  for (unsigned j = 0; j <= 8; ++j) {
    CHECK(sgn(g.norm(j)) > 0);
    for (unsigned k = 0; k <= 8; ++k) {
      if (j != k) CHECK(g.inner(j, k) == 0);
      if (k < j) CHECK(g.cross(j, k) == 0);
    }
    CHECK(g.cross(j, j) == g.norm(j));
  }
}

TEST_CASE("orthogonality against a direct grid average") {
  // M = 4: expectations are averages over the 5 grid points
  auto tiny = ProductDistribution::grid_uniform(2);
  OrthogonalBasis b(tiny, 2);
  auto value = [&](unsigned k, const Rational& x) {
    Rational v = 0;
    const auto& c = b.coefficients(k);
    for (std::size_t a = 0; a < c.size(); ++a) v += c[a] * pow(x, static_cast<unsigned>(a));
    return v;
  };
  for (unsigned j = 0; j <= 4; ++j)
    for (unsigned k = 0; k <= 4; ++k) {
      Rational avg = 0;
      for (unsigned p = 0; p <= 4; ++p) {
        Rational x(4 + p, 4);
        avg += value(j, x) * value(k, x);
      }
      avg /= 5;
      if (j == k)
        CHECK(avg == b.norm(j));
      else
        CHECK(avg == 0);
    }
}

TEST_CASE("exact correlations") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 2);
  SUBCASE("zero residual correlates to zero") {
    auto G = poly(3, {{mono({1, 1, 0}), 3}});
    ExactCorrelationOracle oracle(G, basis);
    oracle.set_hypothesis(G);
    CHECK(oracle.residual_zero());
    for (unsigned k = 0; k <= 4; ++k) {
      CHECK(oracle.correlate_exact({{0, k}}, Rhs::residual) == 0);
      CHECK(oracle.correlate_exact({{1, k}, {2, 1}}, Rhs::residual_squared) == 0);
      CHECK_FALSE(oracle.detect({{0, k}}));
    }
  }
  SUBCASE("square of x1 fires the degree-4 test first") {
    auto G = poly(3, {{mono({2, 0, 0}), 1}});
    ExactCorrelationOracle oracle(G, basis);
    CHECK(oracle.detect({{0, 4}}));
    CHECK(oracle.detect({{0, 2}}));
    CHECK_FALSE(oracle.detect({{1, 2}}));
    CHECK(lex_search(oracle, {0, 1, 2}, 2) == std::vector<unsigned>{2, 0, 0});
    CHECK(oracle.coefficient(mono({2, 0, 0})) == 1);
  }
}

TEST_CASE("property: coefficient identity for single monomials") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 3);
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    Monomial g(4);
    for (int k = 0; k < 3; ++k) ++g.exponents[rng() % 4];
    Rational a(static_cast<long>(rng() % 19) - 9, 1 + static_cast<long>(rng() % 5));
    a.canonicalize();
    if (sgn(a) == 0) a = 1;
    ExactCorrelationOracle oracle(poly(4, {{g, a}}), basis);
    Lhs lhs;
    Rational norms = 1;
    for (Feature i : g.support()) {
      lhs.push_back({i, g[i]});
      norms *= basis.norm(g[i]);
    }
    CHECK(oracle.correlate_exact(lhs, Rhs::residual) == a * norms);
    CHECK(oracle.coefficient(g) == a);
  }
}

TEST_CASE("property: monic detection sign matches a floating orthonormal test") {
  auto cont = ProductDistribution::continuous_uniform();
  const unsigned d = 2;
  OrthogonalBasis basis(cont, d);
  FloatOrthonormal ortho(2 * d, 12);
  std::mt19937_64 rng(43);
  const double tolerance = 1e-9;
  for (int trial = 0; trial < 40; ++trial) {
    auto G = random_polynomial(2, d, 2, rng);
    auto H = random_polynomial(2, d, 1, rng);
    ExactCorrelationOracle oracle(G, basis);
    oracle.set_hypothesis(H);
    Polynomial delta = G - H;
    for (unsigned k0 = 0; k0 <= 2 * d; ++k0)
      for (unsigned k1 = 0; k1 <= 2 * d; k1 += 2) {
        Lhs lhs{{0, k0}, {1, k1}};
        Rational exact = oracle.correlate_exact(lhs, Rhs::residual_squared);
        double quad = 0;
        for (std::size_t a = 0; a < ortho.nodes.size(); ++a)
          for (std::size_t b = 0; b < ortho.nodes.size(); ++b) {
            const double x[2] = {ortho.nodes[a], ortho.nodes[b]};
            double r = delta.evaluate_double(x);
            quad += ortho.weights[a] * ortho.weights[b] * ortho.values[k0][a] * ortho.values[k1][b] * r * r;
          }
        double scaled = exact.get_d() / std::sqrt(basis.norm(k0).get_d() * basis.norm(k1).get_d());
        CHECK(scaled == doctest::Approx(quad).epsilon(tolerance).scale(1.0));
        if (std::abs(quad) > 1e-6) CHECK((sgn(exact) > 0) == (quad > 0));
      }
  }
}

TEST_CASE("polynomial scratch learner") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 2);
  SUBCASE("zero target") {
    ExactCorrelationOracle oracle(Polynomial(3), basis);
    CHECK(learn_polynomial_scratch(oracle, 2, 2).zero());
  }
  SUBCASE("single product term") {
    auto G = poly(3, {{mono({1, 1, 0}), 3}});
    ExactCorrelationOracle oracle(G, basis);
    CHECK(lex_search(oracle, {0, 1, 2}, 2) == std::vector<unsigned>{1, 1, 0});
    CHECK(learn_polynomial_scratch(oracle, 2, 1) == G);
  }
  SUBCASE("two terms come out in lexicographic order") {
    auto G = poly(3, {{mono({2, 0, 0}), 3}, {mono({1, 1, 0}), -5}});
    ExactCorrelationOracle oracle(G, basis);
    CHECK(lex_search(oracle, {0, 1, 2}, 2) == std::vector<unsigned>{2, 0, 0});
    CHECK(oracle.coefficient(mono({2, 0, 0})) == 3);
    oracle.set_hypothesis(poly(3, {{mono({2, 0, 0}), 3}}));
    CHECK(lex_search(oracle, {0, 1, 2}, 2) == std::vector<unsigned>{1, 1, 0});
    CHECK(oracle.coefficient(mono({1, 1, 0})) == -5);
    CHECK(learn_polynomial_scratch(oracle, 2, 2) == G);
  }
  SUBCASE("more terms than the sparsity bound") {
    auto G = poly(3, {{mono({2, 0, 0}), 3}, {mono({1, 1, 0}), -5}});
    ExactCorrelationOracle oracle(G, basis);
    CHECK_THROWS_AS(learn_polynomial_scratch(oracle, 2, 1), SparsityViolationError);
  }
  SUBCASE("charged oracle reads every cell") {
    auto G = poly(3, {{mono({0, 1, 0}), 2}});
    auto ds = data_for(G, 5, dist, 1);
    ExactCorrelationOracle oracle(G, basis, &ds);
    CHECK(learn_polynomial_scratch(oracle, 2, 1) == G);
    CHECK(ds.ledger().total() == 15);
  }
}

TEST_CASE("property: exact scratch learner reproduces random sparse polynomials") {
  std::mt19937_64 rng(47);
  auto dist = ProductDistribution::grid_uniform(20);
  std::vector<OrthogonalBasis> bases;
  for (unsigned d = 1; d <= 4; ++d) bases.emplace_back(dist, d);
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t N = 1 + rng() % 8;
    unsigned d = 1 + static_cast<unsigned>(rng() % 4);
    unsigned t = 1 + static_cast<unsigned>(rng() % 3);
    // distinct non-constant monomials of degree <= d: C(N + d, d) - 1
    std::size_t available = 1;
    for (unsigned k = 1; k <= d; ++k) available = available * (N + k) / k;
    t = static_cast<unsigned>(std::min<std::size_t>(t, available - 1));
    auto G = random_polynomial(N, d, t, rng);
    ExactCorrelationOracle oracle(G, bases[d - 1]);
    INFO("target " << to_json(G).dump());
    auto out = learn_polynomial_scratch(oracle, d, t);
    INFO("learned " << to_json(out).dump());
    CHECK(out == G);
  }
}

TEST_CASE("polynomial LFD") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 3);
  const unsigned d = 3, t = 2;
  SUBCASE("representation holds every monomial") {
    auto G = poly(4, {{mono({1, 0, 1, 0}), Rational(3, 2)}, {mono({0, 2, 0, 0}), -2}});
    auto rep = rep_of(4, {mono({1, 0, 1, 0}), mono({0, 1, 0, 0})});
    auto ds = data_for(G, 6, dist, 2);
    auto verify = data_for(G, 1, dist, 3);
    ExactCorrelationOracle oracle(G, basis, &ds);
    auto out = lfd_polynomial(oracle, verify, rep, d, t);
    REQUIRE(std::holds_alternative<PolynomialLearned>(out));
    CHECK(std::get<PolynomialLearned>(out).G == G);
    CHECK(ds.ledger().max_per_example() <= rep.rank() + t * d);
    CHECK(verify.ledger().total() <= t * d);
  }
  SUBCASE("a monomial off the span fails verification") {
    auto G = poly(3, {{mono({1, 1, 0}), 1}});
    auto rep = rep_of(3, {mono({1, 0, 0})});
    auto ds = data_for(G, 6, dist, 4);
    std::uint64_t M = dist.denominator();
    Rational label = G.evaluate_on_grid(std::vector<std::uint64_t>{M + M / 2, M + M / 4, M}, M);
    GridDataset verify(3, M, {M + M / 2, M + M / 4, M}, {label});
    ExactCorrelationOracle oracle(G, basis, &ds);
    // one term: the projection 3/2 x1 is kept and fails the check
    auto out = lfd_polynomial(oracle, verify, rep, d, 1);
    REQUIRE(std::holds_alternative<PolynomialFailed>(out));
    CHECK(std::get<PolynomialFailed>(out).reason == PolynomialFailure::verification_mismatch);
    // two terms: the residual has no component left on x1
    out = lfd_polynomial(oracle, verify, rep, d, 2);
    CHECK(std::get<PolynomialFailed>(out).reason == PolynomialFailure::zero_coefficient);
  }
  SUBCASE("empty representation") {
    auto G = poly(3, {{mono({1, 0, 0}), 1}});
    auto verify = data_for(G, 1, dist, 5);
    ExactCorrelationOracle oracle(G, basis);
    auto out = lfd_polynomial(oracle, verify, RepresentationMatrix(3), d, t);
    CHECK(std::get<PolynomialFailed>(out).reason == PolynomialFailure::empty_representation);
  }
  SUBCASE("one-term targets agree with the monomial learner") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
      Monomial f1(4), f2(4);
      ++f1.exponents[rng() % 4];
      ++f2.exponents[rng() % 4];
      ++f2.exponents[rng() % 4];
      RepresentationMatrix rep(4);
      rep.insert(f1);
      if (!rep.in_span(f2)) rep.insert(f2);
      Monomial g(4);
      for (std::size_t r = 0; r < 4; ++r) g.exponents[r] = f1[r] + (rep.rank() == 2 ? f2[r] : 0);
      auto G = poly(4, {{g, 1}});
      auto ds = data_for(G, 4, dist, 100 + trial);
      auto verify = data_for(G, 1, dist, 200 + trial);
      ExactCorrelationOracle oracle(G, basis, &ds);
      auto out = lfd_polynomial(oracle, verify, rep, d, 1);
      auto mds = ds;
      auto mverify = verify;
      auto mout = lfd_monomial(mds, mverify, rep, dist, d, {EstimationMode::exact, &g});
      REQUIRE(std::holds_alternative<PolynomialLearned>(out));
      REQUIRE(std::holds_alternative<MonomialLearned>(mout));
      CHECK(std::get<PolynomialLearned>(out).G.terms().begin()->first == std::get<MonomialLearned>(mout).g);
    }
  }
}

TEST_CASE("polynomial ImproveRep") {
  auto x0 = Monomial::unit(3, 0), x1 = Monomial::unit(3, 1);
  SUBCASE("all monomials already in span") {
    auto rep = rep_of(3, {x0, x1});
    auto out = improve_rep_polynomial(rep, poly(3, {{mono({1, 1, 0}), 2}, {x0, 1}}));
    CHECK(out.rank() == 2);
  }
  SUBCASE("two fresh monomials") {
    auto out = improve_rep_polynomial(RepresentationMatrix(3), poly(3, {{x0, 1}, {x1, 1}}));
    CHECK(out.rank() == 2);
  }
  SUBCASE("powers of one variable add one column") {
    auto out = improve_rep_polynomial(RepresentationMatrix(3),
                                      poly(3, {{x0, 1}, {mono({2, 0, 0}), 1}, {mono({3, 0, 0}), 1}}));
    CHECK(out.rank() == 1);
  }
}

TEST_CASE("seen-features polynomial baseline") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 2);
  auto G = poly(4, {{mono({1, 0, 1, 0}), 2}, {mono({0, 0, 0, 2}), Rational(-1, 2)}});
  SUBCASE("seen covers the support") {
    auto ds = data_for(G, 5, dist, 6);
    auto verify = data_for(G, 1, dist, 7);
    ExactCorrelationOracle oracle(G, basis, &ds);
    std::set<Feature> seen{0, 2, 3};
    auto out = naive_lfd_seen_polynomial(oracle, verify, seen, 2, 2);
    REQUIRE(std::holds_alternative<PolynomialLearned>(out));
    CHECK(std::get<PolynomialLearned>(out).G == G);
    CHECK(ds.ledger().max_per_example() <= seen.size() + 2 * 2);
  }
  SUBCASE("unseen support feature") {
    auto ds = data_for(G, 5, dist, 8);
    auto verify = data_for(G, 1, dist, 9);
    ExactCorrelationOracle oracle(G, basis, &ds);
    auto out = naive_lfd_seen_polynomial(oracle, verify, {0, 2}, 2, 2);
    CHECK(std::holds_alternative<PolynomialFailed>(out));
  }
}

TEST_CASE("sampled oracle agrees with the exact oracle") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 2);
  std::mt19937_64 rng(59);
  const double z_tolerance = 5.0;  // standard errors
  for (int trial = 0; trial < 20; ++trial) {
    auto G = random_polynomial(3, 2, 2, rng);
    auto ds = data_for(G, 3000, dist, 300 + trial);
    SampledCorrelationOracle sampled(ds, basis);
    ExactCorrelationOracle exact(G, basis);
    Lhs lhs{{static_cast<Feature>(rng() % 3), static_cast<unsigned>(rng() % 3)}};
    for (Rhs rhs : {Rhs::residual, Rhs::residual_squared}) {
      auto est = sampled.estimate(lhs, rhs);
      double truth = exact.correlate_exact(lhs, rhs).get_d();
      CHECK(std::abs(est.mean - truth) <= z_tolerance * est.std_error + 1e-6);
    }
  }
}

TEST_CASE("sampled scratch learner on a small instance") {
  auto dist = ProductDistribution::grid_uniform(20);
  OrthogonalBasis basis(dist, 2);
  auto G = poly(3, {{mono({1, 0, 0}), Rational(3, 2)}, {mono({0, 0, 1}), -2}});
  auto ds = data_for(G, 20000, dist, 10);
  SampledCorrelationOracle oracle(ds, basis);
  CHECK(lex_search(oracle, {0, 1, 2}, 2) == std::vector<unsigned>{1, 0, 0});
  CHECK(oracle.coefficient(mono({1, 0, 0})) == Rational(3, 2));
  CHECK(learn_polynomial_scratch(oracle, 2, 2) == G);
  CHECK(ds.ledger().total() == 60000);
}

TEST_CASE("polynomial JSON") {
  auto G = poly(3, {{mono({1, 0, 2}), Rational(-3, 4)}});
  auto j = to_json(G);
  CHECK(j["terms"][0]["coeff"] == "-3/4");
  CHECK(j["terms"][0]["monomial"]["2"] == 2);
  CHECK(polynomial_from_json(j, 3) == G);
  nlohmann::json dup = {{"terms", {j["terms"][0], j["terms"][0]}}};
  CHECK_THROWS_AS(polynomial_from_json(dup, 3), UsageError);
  CHECK_THROWS_AS(polynomial_from_json(nlohmann::json::array(), 3), UsageError);
}
