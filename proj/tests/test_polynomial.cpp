#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <stdexcept>
#include <vector>

#include "towerfield/polynomial.hpp"
#include "towerfield/rational.hpp"

using towerfield::Poly;
using towerfield::Rat;

namespace {

using P = Poly<Rat>;

P make(std::vector<long> coeffs) {
  std::vector<Rat> c;
  c.reserve(coeffs.size());
  for (long v : coeffs) c.emplace_back(v);
  return P(std::move(c));
}

P random_poly(std::mt19937& rng, int max_deg) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<long> num(-9, 9);
  std::uniform_int_distribution<long> den(1, 5);
  int d = deg(rng);
  std::vector<Rat> c;
  for (int i = 0; i <= d; ++i) c.emplace_back(num(rng), den(rng));
  return P(std::move(c));
}

}  // namespace

TEST_CASE("polynomial basics and trimming", "[polynomial]") {
  CHECK(P().is_zero());
  CHECK(P().degree() == -1);
  CHECK(make({0, 0, 0}).is_zero());
  CHECK(make({5}).degree() == 0);
  CHECK(make({0, 1}).degree() == 1);
  CHECK(P::variable() == make({0, 1}));
  CHECK(P::monomial(Rat(3), 4) == make({0, 0, 0, 0, 3}));
  CHECK(make({1, 2}).coeff(0) == Rat(1));
  CHECK(make({1, 2}).coeff(5) == Rat(0));
  CHECK_THROWS_AS(P().leading(), std::domain_error);
}

TEST_CASE("polynomial arithmetic identities", "[polynomial]") {
  P x = P::variable();
  CHECK((x + P(Rat(1))) + (x - P(Rat(1))) == make({0, 2}));
  CHECK(x * x == make({0, 0, 1}));
  CHECK((x + P(Rat(1))) * (x - P(Rat(1))) == make({-1, 0, 1}));

  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    P p = random_poly(rng, 6);
    CHECK(P() + p == p);
    CHECK(p - p == P());
    CHECK(p * P(Rat(1)) == p);
    CHECK(p * P() == P());
  }
}

TEST_CASE("polynomial divmod", "[polynomial]") {
  P x = P::variable();

  auto [q1, r1] = divmod(x * x * x, x - P(Rat(1)));
  CHECK(q1 == make({1, 1, 1}));
  CHECK(r1 == make({1}));

  auto [q2, r2] = divmod(x * x, x * x);
  CHECK(q2 == make({1}));
  CHECK(r2.is_zero());

  CHECK_THROWS_AS(divmod(x, P()), std::domain_error);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    P a = random_poly(rng, 8);
    P b = random_poly(rng, 5);
    if (b.is_zero()) continue;
    auto [q, r] = divmod(a, b);
    CHECK(q * b + r == a);
    CHECK(r.degree() < b.degree());
  }
}

TEST_CASE("polynomial extended gcd", "[polynomial]") {
  P x = P::variable();

  auto [g1, s1, t1] = poly_ext_gcd(x * x - P(Rat(1)), x - P(Rat(1)));
  CHECK(g1 == x - P(Rat(1)));
  CHECK(s1 * (x * x - P(Rat(1))) + t1 * (x - P(Rat(1))) == g1);

  auto [g2, s2, t2] = poly_ext_gcd(x * x + P(Rat(1)), x);
  CHECK(g2 == make({1}));
  CHECK(s2 * (x * x + P(Rat(1))) + t2 * x == g2);

  std::mt19937 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    P a = random_poly(rng, 6);
    P b = random_poly(rng, 6);
    if (a.is_zero() && b.is_zero()) continue;
    auto [g, s, t] = poly_ext_gcd(a, b);
    CHECK(s * a + t * b == g);
    CHECK(!g.is_zero());
    CHECK(g.leading() == Rat(1));
    CHECK(divmod(a, g).second.is_zero());
    CHECK(divmod(b, g).second.is_zero());
  }
}

TEST_CASE("polynomial gcd of products", "[polynomial]") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    P a = random_poly(rng, 3);
    P b = random_poly(rng, 3);
    P c = random_poly(rng, 3);
    if (c.is_zero() || a.is_zero() || b.is_zero()) continue;
    P g = poly_gcd(a * c, b * c);
    CHECK(divmod(g, c.monic()).second.is_zero());
  }
}

TEST_CASE("polynomial evaluation", "[polynomial]") {
  P p = make({-4, 16, 0, 0, 1});
  CHECK(p.eval(Rat(0)) == Rat(-4));
  CHECK(p.eval(Rat(1)) == Rat(13));
  CHECK(p.eval(Rat(1, 2)) == Rat(-4) + Rat(8) + Rat(1, 16));
}
