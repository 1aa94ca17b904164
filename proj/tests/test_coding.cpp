#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <stdexcept>
#include <vector>

#include "towerfield/coding.hpp"
#include "towerfield/rational.hpp"

using towerfield::BitReader;
using towerfield::BitVec;
using towerfield::Int;
using towerfield::Rat;

namespace {

std::string nat_bits(long n) {
  BitVec v;
  v.append_nat(Int(n));
  return v.to_string();
}

std::string rat_bits(const Rat& r) {
  BitVec v;
  towerfield::append_rational(v, r);
  return v.to_string();
}

Rat rat_of_bits(const std::string& s) {
  BitVec v = BitVec::from_string(s);
  BitReader rd(v);
  Rat r = towerfield::read_rational(rd);
  REQUIRE(rd.done());
  return r;
}

}  // namespace

TEST_CASE("bit vector basics", "[coding]") {
  BitVec v;
  v.push(true);
  v.push(false);
  v.push(true);
  CHECK(v.size() == 3);
  CHECK(v.to_string() == "101");
  CHECK(BitVec::from_string("101") == v);
  CHECK_THROWS_AS(BitVec::from_string("10x"), std::invalid_argument);

  BitVec w = BitVec::from_string("0011");
  v.append(w);
  CHECK(v.to_string() == "1010011");

  BitReader rd(v);
  CHECK(rd.read() == true);
  CHECK(rd.read() == false);
  CHECK(rd.pos() == 2);
  rd.read();
  rd.read();
  rd.read();
  rd.read();
  rd.read();
  CHECK(rd.done());
  CHECK_THROWS_AS(rd.read(), std::out_of_range);
}

TEST_CASE("gamma code for naturals", "[coding]") {
  CHECK(nat_bits(0) == "1");
  CHECK(nat_bits(1) == "010");
  CHECK(nat_bits(2) == "011");
  CHECK(nat_bits(3) == "00100");
  CHECK(nat_bits(4) == "00101");
  CHECK(nat_bits(6) == "00111");
  CHECK(nat_bits(7) == "0001000");

  for (long n = 0; n <= 300; ++n) {
    BitVec v;
    v.append_nat(Int(n));
    CHECK(v.size() == towerfield::nat_code_length(Int(n)));
    BitReader rd(v);
    CHECK(rd.read_nat() == n);
    CHECK(rd.done());
  }

  // prefix-free concatenation parses back
  BitVec v;
  v.append_nat(Int(5));
  v.append_nat(Int(0));
  v.append_nat(Int(100));
  BitReader rd(v);
  CHECK(rd.read_nat() == 5);
  CHECK(rd.read_nat() == 0);
  CHECK(rd.read_nat() == 100);
  CHECK(rd.done());

  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    Int n = Int(rng()) * Int(rng()) % (Int(1) << 96);
    BitVec b;
    b.append_nat(n);
    BitReader r(b);
    CHECK(r.read_nat() == n);
  }
}

TEST_CASE("unary and raw two-bit fields", "[coding]") {
  BitVec v;
  v.append_unary(0);
  v.append_unary(3);
  v.append_raw2(0);
  v.append_raw2(2);
  v.append_raw2(3);
  CHECK(v.to_string() == "01110001011");
  BitReader rd(v);
  CHECK(rd.read_unary() == 0);
  CHECK(rd.read_unary() == 3);
  CHECK(rd.read_raw2() == 0);
  CHECK(rd.read_raw2() == 2);
  CHECK(rd.read_raw2() == 3);
  CHECK(rd.done());
  CHECK_THROWS_AS(v.append_raw2(4), std::domain_error);
  CHECK_THROWS_AS(v.append_unary(-1), std::domain_error);
}

TEST_CASE("continued fraction quotients", "[coding]") {
  CHECK(towerfield::cf_quotients(Rat(1)) == std::vector<Int>{Int(1)});
  CHECK(towerfield::cf_quotients(Rat(3, 2)) == std::vector<Int>({Int(1), Int(2)}));
  CHECK(towerfield::cf_quotients(Rat(5, 3)) == std::vector<Int>({Int(1), Int(1), Int(2)}));
  CHECK(towerfield::cf_quotients(Rat(7)) == std::vector<Int>{Int(7)});
  CHECK_THROWS_AS(towerfield::cf_quotients(Rat(1, 2)), std::domain_error);

  std::mt19937 rng(7);
  std::uniform_int_distribution<long> d(1, 100000);
  for (int trial = 0; trial < 300; ++trial) {
    long p = d(rng), q = d(rng);
    if (p < q) std::swap(p, q);
    Rat m(p, q);
    auto cf = towerfield::cf_quotients(m);
    CHECK(towerfield::cf_value(cf) == m);
    CHECK(cf.front() >= 1);
    for (size_t i = 1; i < cf.size(); ++i) CHECK(cf[i] >= 1);
    if (cf.size() > 1) CHECK(cf.back() >= 2);
  }
}

TEST_CASE("rational bit code known values", "[coding]") {
  CHECK(rat_bits(Rat(0)) == "0");
  CHECK(rat_bits(Rat(1)) == "11010");
  CHECK(rat_bits(Rat(-1)) == "11011");
  CHECK(rat_bits(Rat(2)) == "1010010");
  CHECK(rat_bits(Rat(-2)) == "1010011");
  CHECK(rat_bits(Rat(1, 2)) == "1010000");
  CHECK(rat_bits(Rat(-1, 2)) == "1010001");
  CHECK(rat_bits(Rat(3)) == "1011010");
  CHECK(rat_bits(Rat(1, 3)) == "1011000");
  CHECK(rat_bits(Rat(3, 2)) == "111010010");
  CHECK(rat_bits(Rat(2, 3)) == "111010000");
  CHECK(rat_bits(Rat(5, 3)) == "11111010010");

  for (const char* s :
       {"0", "11010", "11011", "1010010", "1010000", "1011000", "111010000", "11111010010"}) {
    CHECK(rat_bits(rat_of_bits(s)) == s);
  }
}

TEST_CASE("rational bit code round trip", "[coding]") {
  std::mt19937 rng(20260825);
  std::uniform_int_distribution<long> num(-100000, 100000);
  std::uniform_int_distribution<long> den(1, 100000);
  for (int trial = 0; trial < 1000; ++trial) {
    Rat r(num(rng), den(rng));
    BitVec v;
    towerfield::append_rational(v, r);
    BitReader rd(v);
    CHECK(towerfield::read_rational(rd) == r);
    CHECK(rd.done());
  }
}

TEST_CASE("rational bit code stays short for wide values", "[coding]") {
  // the code is linear in the bit size of the fraction, so power-of-two
  // extremes stay around two hundred bits rather than 2^100
  Int pow100 = Int(1) << 100;
  Rat big(pow100);
  BitVec v;
  towerfield::append_rational(v, big);
  CHECK(v.size() < 300);
  BitReader rd(v);
  CHECK(towerfield::read_rational(rd) == big);

  Rat small = big.inv();
  BitVec w;
  towerfield::append_rational(w, small);
  CHECK(w.size() < 300);
  BitReader rd2(w);
  CHECK(towerfield::read_rational(rd2) == small);

  Rat mixed(Int(Int(3) << 200), Int((Int(1) << 100) + 1));
  BitVec u;
  towerfield::append_rational(u, mixed);
  CHECK(u.size() < 1500);
  BitReader rd3(u);
  CHECK(towerfield::read_rational(rd3) == mixed);
}

TEST_CASE("diagonal pairing known values", "[coding]") {
  CHECK(towerfield::pair_code(0, 0) == 0);
  CHECK(towerfield::pair_code(1, 0) == 1);
  CHECK(towerfield::pair_code(0, 1) == 2);
  CHECK(towerfield::pair_code(2, 0) == 3);
  CHECK(towerfield::pair_code(1, 1) == 4);
  CHECK(towerfield::pair_code(0, 2) == 5);
  CHECK(towerfield::pair_code(2, 2) == 12);
  CHECK(towerfield::pair_code(3, 12) == 132);
  CHECK(towerfield::pair_code(23, 10) == 571);

  // monotone in each coordinate
  for (long a = 0; a < 20; ++a) {
    for (long b = 0; b < 20; ++b) {
      CHECK(towerfield::pair_code(Int(a + 1), Int(b)) > towerfield::pair_code(Int(a), Int(b)));
      CHECK(towerfield::pair_code(Int(a), Int(b + 1)) > towerfield::pair_code(Int(a), Int(b)));
    }
  }
}

TEST_CASE("diagonal pairing round trip", "[coding]") {
  for (long n = 0; n < 500; ++n) {
    auto [a, b] = towerfield::pair_split(Int(n));
    CHECK(towerfield::pair_code(a, b) == n);
  }

  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    Int a = Int(rng()) % (Int(1) << 80);
    Int b = Int(rng()) % (Int(1) << 80);
    auto [x, y] = towerfield::pair_split(towerfield::pair_code(a, b));
    CHECK(x == a);
    CHECK(y == b);
  }

  // codes around 2^200 split and repack exactly
  Int huge = (Int(1) << 200) + 12345;
  auto [p, q] = towerfield::pair_split(huge);
  CHECK(towerfield::pair_code(p, q) == huge);
}
