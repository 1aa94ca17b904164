#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>
#include <stdexcept>

#include "towerfield/rational.hpp"

using towerfield::Int;
using towerfield::Rat;

TEST_CASE("rational canonical form", "[rational]") {
  Rat a(Int(2), Int(4));
  CHECK(a.numerator() == 1);
  CHECK(a.denominator() == 2);

  Rat b(Int(-3), Int(-6));
  CHECK(b.numerator() == 1);
  CHECK(b.denominator() == 2);
  CHECK(a == b);

  Rat c(Int(3), Int(-6));
  CHECK(c.numerator() == -1);
  CHECK(c.denominator() == 2);

  CHECK(Rat(0).is_zero());
  CHECK(Rat(Int(0), Int(7)).is_zero());
  CHECK(Rat(1).is_one());
  CHECK_THROWS_AS(Rat(Int(1), Int(0)), std::domain_error);
}

TEST_CASE("rational arithmetic", "[rational]") {
  Rat half(1, 2);
  Rat third(1, 3);
  CHECK(half + third == Rat(5, 6));
  CHECK(half - third == Rat(1, 6));
  CHECK(half * third == Rat(1, 6));
  CHECK(half / third == Rat(3, 2));
  CHECK(-half == Rat(-1, 2));
  CHECK(half.inv() == Rat(2));
  CHECK_THROWS_AS(Rat(0).inv(), std::domain_error);
  CHECK_THROWS_AS(half / Rat(0), std::domain_error);

  CHECK(half < Rat(2, 3));
  CHECK(Rat(-1) < Rat(0));
  CHECK(Rat(7, 3).sign() == 1);
  CHECK(Rat(-7, 3).sign() == -1);
  CHECK(Rat(0).sign() == 0);
}

TEST_CASE("rational field axioms on random values", "[rational]") {
  std::mt19937 rng(20260825);
  auto rand_rat = [&rng]() {
    std::uniform_int_distribution<long> num(-50, 50);
    std::uniform_int_distribution<long> den(1, 30);
    return Rat(num(rng), den(rng));
  };
  for (int trial = 0; trial < 50; ++trial) {
    Rat a = rand_rat(), b = rand_rat(), c = rand_rat();
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + Rat(0) == a);
    CHECK(a * Rat(1) == a);
    if (!a.is_zero()) CHECK(a * a.inv() == Rat(1));
  }
}

TEST_CASE("rational string round trip", "[rational]") {
  CHECK(Rat::from_string("22/7") == Rat(22, 7));
  CHECK(Rat::from_string("-4/6") == Rat(-2, 3));
  CHECK(Rat::from_string("5") == Rat(5));
  CHECK(Rat(-8, 5).to_string() == "-8/5");
  CHECK(Rat(3).to_string() == "3");
  CHECK_THROWS_AS(Rat::from_string("abc"), std::invalid_argument);

  std::ostringstream os;
  os << Rat(7, 2);
  CHECK(os.str() == "7/2");
}

TEST_CASE("rational big values stay exact", "[rational]") {
  Rat big(Int("123456789012345678901234567891"), Int(7));
  Rat sum = big + big;
  CHECK(sum.numerator() == Int("246913578024691357802469135782"));
  CHECK(sum.denominator() == 7);
  CHECK(big - big == Rat(0));
  CHECK((big * Rat(7)).numerator() == Int("123456789012345678901234567891"));
}
