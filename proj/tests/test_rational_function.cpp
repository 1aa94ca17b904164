#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <stdexcept>
#include <vector>

#include "towerfield/rational.hpp"
#include "towerfield/rational_function.hpp"

using towerfield::Poly;
using towerfield::Rat;
using towerfield::RatFn;

namespace {

using P = Poly<Rat>;
using RF = RatFn<Rat>;

P make(std::vector<long> coeffs) {
  std::vector<Rat> c;
  c.reserve(coeffs.size());
  for (long v : coeffs) c.emplace_back(v);
  return P(std::move(c));
}

P random_poly(std::mt19937& rng, int max_deg, bool nonzero = false) {
  std::uniform_int_distribution<int> deg(0, max_deg);
  std::uniform_int_distribution<long> num(-6, 6);
  int d = deg(rng);
  std::vector<Rat> c;
  for (int i = 0; i <= d; ++i) c.emplace_back(num(rng));
  P p(std::move(c));
  if (nonzero && p.is_zero()) return P(Rat(1));
  return p;
}

}  // namespace

TEST_CASE("rational function canonical form", "[ratfn]") {
  RF a(make({0, 2}), make({2}));
  CHECK(a.num() == make({0, 1}));
  CHECK(a.den() == make({1}));

  RF b(make({-1, 0, 1}), make({-1, 1}));
  CHECK(b.num() == make({1, 1}));
  CHECK(b.den() == make({1}));

  RF zero(make({0}), make({5, 3}));
  CHECK(zero.is_zero());
  CHECK(zero.den() == make({1}));

  RF c(make({1}), make({0, 2}));  // 1/(2x) -> (1/2)/x
  CHECK(c.den() == make({0, 1}));
  CHECK(c.num() == P(Rat(1, 2)));

  CHECK_THROWS_AS(RF(make({1}), P()), std::domain_error);
}

TEST_CASE("rational function cross multiplication oracle", "[ratfn]") {
  std::mt19937 rng(20260825);
  for (int trial = 0; trial < 60; ++trial) {
    P a = random_poly(rng, 4);
    P b = random_poly(rng, 4, true);
    P c = random_poly(rng, 3, true);
    RF plain(a, b);
    RF scaled(a * c, b * c);
    CHECK(plain == scaled);
    // canonicalization is idempotent
    CHECK(RF(plain.num(), plain.den()) == plain);
    // cross multiplication: num/den equals a/b as fractions
    CHECK(plain.num() * b == a * plain.den());
  }
}

TEST_CASE("rational function field axioms", "[ratfn]") {
  std::mt19937 rng(99);
  auto rand_rf = [&rng]() {
    return RF(random_poly(rng, 3), random_poly(rng, 2, true));
  };
  for (int trial = 0; trial < 40; ++trial) {
    RF a = rand_rf(), b = rand_rf(), c = rand_rf();
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + RF() == a);
    CHECK(a * RF(1L) == a);
    CHECK(a - a == RF());
    if (!a.is_zero()) {
      CHECK(a * a.inv() == RF(1L));
      CHECK(a / a == RF(1L));
    }
  }
  CHECK_THROWS_AS(RF().inv(), std::domain_error);
  CHECK_THROWS_AS(RF(1L) / RF(), std::domain_error);
}

TEST_CASE("rational function constants and evaluation", "[ratfn]") {
  RF c(Rat(7, 3));
  CHECK(c.is_constant());
  CHECK(c.constant_value() == Rat(7, 3));
  CHECK(RF().is_constant());
  CHECK(RF().constant_value() == Rat(0));
  CHECK(!RF::variable().is_constant());

  RF f(make({1, 1}), make({-2, 1}));  // (x+1)/(x-2)
  CHECK(f.eval(Rat(3)) == Rat(4));
  CHECK(f.eval(Rat(0)) == Rat(-1, 2));
  CHECK_THROWS_AS(f.eval(Rat(2)), std::domain_error);
}
