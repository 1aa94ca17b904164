#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "towerfield/graph_oracle.hpp"
#include "towerfield/presentation.hpp"

using namespace towerfield;

namespace {

std::shared_ptr<const Tower> path3_tower() {
  return Tower::create(GraphOracle::finite(3, {{1, 0}, {2, 1}}));
}

std::shared_ptr<FieldPresentation> path3_cf() {
  return FieldPresentation::make(path3_tower(), PresentationMode::ColumnFaithful);
}

TowerElem random_elem(std::mt19937& rng, const std::shared_ptr<const Tower>& tw) {
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_int_distribution<long> coeff(-3, 3);
  auto atom = [&]() -> TowerElem {
    switch (pick(rng)) {
      case 0: return tw->u(0);
      case 1: return tw->v(0);
      case 2: return tw->u(1);
      case 3: return tw->v(1);
      case 4: return tw->x(1, 0);
      case 5: return tw->y(1, 0);
      default: return TowerElem(coeff(rng));
    }
  };
  TowerElem e = atom();
  std::uniform_int_distribution<int> op(0, 2);
  int steps = std::uniform_int_distribution<int>(1, 2)(rng);
  for (int i = 0; i < steps; ++i) {
    TowerElem other = atom();
    switch (op(rng)) {
      case 0: e = e + other; break;
      case 1: e = e - other; break;
      default: e = e * other; break;
    }
  }
  return e;
}

}  // namespace

TEST_CASE("pairing aliases round-trip", "[presentation]") {
  CHECK(pi(Int(0), Int(0)) == 0);
  CHECK(pi(Int(1), Int(0)) == 1);
  CHECK(pi(Int(0), Int(1)) == 2);
  std::mt19937 rng(20260825);
  std::uniform_int_distribution<long> d(0, 1000000);
  for (int t = 0; t < 1000; ++t) {
    Int a = d(rng), b = d(rng);
    auto [x, y] = pi_inv(pi(a, b));
    REQUIRE(x == a);
    REQUIRE(y == b);
  }
}

TEST_CASE("column-faithful codes pack column and rank", "[presentation]") {
  auto p = path3_cf();
  CHECK(p->encode(TowerElem(0)) == 0);  // pi(0, 0)
  CHECK(p->zero() == 0);
  CHECK(p->one() == pi(Int(0), Int(1)));
  auto tw = p->tower();
  CHECK(p->encode(tw->u(0)) == pi(Int(2), Int(0)));
  CHECK(p->encode(tw->v(0)) == pi(Int(2), Int(2)));
  CHECK(p->decode(p->encode(tw->u(0) * tw->u(1) + 3L)) == tw->u(0) * tw->u(1) + 3L);
}

TEST_CASE("enumerate_column matches the census order", "[presentation]") {
  auto p = path3_cf();
  auto tw = p->tower();
  std::vector<Rat> prefix = {Rat(0),     Rat(1),  Rat(-1), Rat(1, 2),
                             Rat(-1, 2), Rat(2),  Rat(-2), Rat(1, 3)};
  for (size_t i = 0; i < prefix.size(); ++i)
    CHECK(p->enumerate_column(0, Int(static_cast<long>(i))) == TowerElem(prefix[i]));
  // generators sit at the very front of their columns
  CHECK(p->enumerate_column(2, Int(0)) == tw->u(0));
  CHECK(p->enumerate_column(2, Int(2)) == tw->v(0));
  CHECK(p->enumerate_column(4, Int(0)) == tw->v(1));
  CHECK(p->enumerate_column(4, Int(2)) == tw->u(1));
  CHECK(p->enumerate_column(1, Int(0)) == tw->y(1, 0));
  // injectivity across ranks, sampled
  std::set<std::string> seen;
  for (long r = 0; r < 40; ++r) {
    BitVec bits = serialize_element(p->enumerate_column(2, Int(r)));
    CHECK(seen.insert(bits.to_string()).second);
  }
}

TEST_CASE("encode and decode are mutually inverse", "[presentation]") {
  auto p = path3_cf();
  auto tw = p->tower();
  std::mt19937 rng(20260825);
  for (int t = 0; t < 40; ++t) {
    TowerElem e = random_elem(rng, tw);
    CHECK(p->decode(p->encode(e)) == e);
  }
  Code c = p->next_domain_code(Int(-1));
  for (int k = 0; k < 120; ++k) {
    CHECK(p->encode(p->decode(c)) == c);
    c = p->next_domain_code(c);
  }
}

TEST_CASE("oracle operations mirror tower arithmetic", "[presentation]") {
  auto p = path3_cf();
  auto tw = p->tower();
  std::mt19937 rng(7);
  for (int t = 0; t < 25; ++t) {
    TowerElem a = random_elem(rng, tw), b = random_elem(rng, tw);
    Code ca = p->encode(a), cb = p->encode(b);
    CHECK(p->decode(p->add(ca, cb)) == a + b);
    CHECK(p->decode(p->sub(ca, cb)) == a - b);
    CHECK(p->decode(p->mul(ca, cb)) == a * b);
    CHECK(p->add(p->zero(), ca) == ca);
    CHECK(p->sub(ca, ca) == p->zero());
  }
  CHECK(p->mul(p->encode(tw->u(0)), p->encode(tw->u(1))) == p->encode(tw->u(0) * tw->u(1)));
}

TEST_CASE("inv_by_search finds least inverses", "[presentation]") {
  auto p = path3_cf();
  auto tw = p->tower();
  CHECK(inv_by_search(*p, p->one()) == p->one());
  CHECK(inv_by_search(*p, p->encode(TowerElem(2))) == p->encode(TowerElem(Rat(1, 2))));
  CHECK_THROWS_AS(inv_by_search(*p, p->zero()), ZeroInverse);
  // samples whose inverses have short serials, so the linear walk stays cheap
  std::vector<TowerElem> samples = {TowerElem(3), TowerElem(Rat(-2, 5)), tw->u(0), tw->u(1),
                                    tw->u(0) + 1L};
  for (const auto& e : samples) {
    Code c = p->encode(e);
    Code b = inv_by_search(*p, c);
    CHECK(p->mul(c, b) == p->one());
    CHECK(p->decode(b) == e.inv());
  }
  CHECK_THROWS_AS(inv_by_search(*p, p->encode(tw->u(0)), 3), BudgetExceeded);
}

TEST_CASE("mu is graph-independent and invertible", "[presentation]") {
  auto pa = FieldPresentation::make(Tower::create(GraphOracle::finite(4, {{1, 0}})),
                                    PresentationMode::ColumnFaithful);
  auto pb = FieldPresentation::make(Tower::create(GraphOracle::finite(4, {{2, 0}, {3, 1}})),
                                    PresentationMode::ColumnFaithful);
  for (long i = 0; i < 4; ++i) {
    CHECK(pa->mu(i) == pb->mu(i));
    CHECK(pa->mu_inv(pa->mu(i)) == i);
  }
  CHECK_FALSE(pa->mu_inv(pa->encode(pa->tower()->v(0))).has_value());
  CHECK_FALSE(pa->mu_inv(pa->zero()).has_value());
  // the pi-condition: consecutive (u, v) code pairs climb
  auto inf = FieldPresentation::make(Tower::create(GraphOracle::builtin("rado")),
                                     PresentationMode::ColumnFaithful);
  Int prev = -1;
  for (long i = 0; i < 6; ++i) {
    Int cur = pi(inf->encode(inf->tower()->u(i)), inf->encode(inf->tower()->v(i)));
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("sequential mode is an isomorphic renumbering", "[presentation]") {
  auto tw = path3_tower();
  auto cf = FieldPresentation::make(tw, PresentationMode::ColumnFaithful);
  auto sq = FieldPresentation::make(tw, PresentationMode::Sequential);
  CHECK(sq->zero() == 0);
  CHECK(sq->one() == 1);
  CHECK(sq->in_domain(Int(123456789)));
  std::mt19937 rng(99);
  for (int t = 0; t < 15; ++t) {
    TowerElem a = random_elem(rng, tw), b = random_elem(rng, tw);
    // the induced bijection commutes with the operations
    Code sa = sq->encode(a), sb = sq->encode(b);
    CHECK(sq->decode(sq->mul(sa, sb)) == cf->decode(cf->mul(cf->encode(a), cf->encode(b))));
    CHECK(sq->decode(sq->add(sa, sb)) == a + b);
  }
  CHECK(sq->mu_inv(sq->mu(1)) == 1);
}

TEST_CASE("finite mode leaves unrealized columns out of domain", "[presentation]") {
  auto p2 = FieldPresentation::make(Tower::create(GraphOracle::finite(2, {{1, 0}})),
                                    PresentationMode::ColumnFaithful);
  CHECK(p2->in_domain(pi(Int(4), Int(7))));
  CHECK_FALSE(p2->in_domain(pi(Int(6), Int(0))));
  CHECK_FALSE(p2->in_domain(pi(Int(3), Int(5))));
  CHECK_FALSE(p2->in_domain(Int(-3)));
  CHECK_THROWS_AS(p2->decode(pi(Int(6), Int(0))), CodeOutOfDomain);
  CHECK_THROWS_AS(p2->enumerate_column(6, Int(0)), ColumnNotRealized);
  CHECK_THROWS_AS(p2->encode(p2->tower()->u(5)), VertexOutOfRange);
  // domain iteration skips the gaps
  Code c = p2->next_domain_code(Int(-1));
  for (int k = 0; k < 200; ++k) {
    REQUIRE(p2->in_domain(c));
    Code n = p2->next_domain_code(c);
    for (Int m = c + 1; m < n; ++m) REQUIRE_FALSE(p2->in_domain(m));
    c = n;
  }
}

TEST_CASE("scrambled copies conjugate the oracle surface", "[presentation]") {
  auto p = path3_cf();
  auto tw = p->tower();

  auto id = scramble(p, Permutation::named("identity"));
  CHECK(id->zero() == p->zero());
  CHECK(id->add(p->encode(tw->u(0)), p->one()) == p->add(p->encode(tw->u(0)), p->one()));

  Code cu = p->encode(tw->u(0));
  Code cv = p->encode(tw->v(0));
  auto sc = scramble(p, Permutation::swaps({{p->zero(), cu}, {cv, p->one()}}));
  CHECK(sc->zero() == cu);
  CHECK(sc->one() == cv);
  // conjugation: op'(s(a), s(b)) = s(op(a, b))
  std::mt19937 rng(5);
  Permutation perm = Permutation::swaps({{p->zero(), cu}, {cv, p->one()}});
  for (int t = 0; t < 10; ++t) {
    TowerElem a = random_elem(rng, tw), b = random_elem(rng, tw);
    Code ca = p->encode(a), cb = p->encode(b);
    CHECK(sc->mul(perm.apply(ca), perm.apply(cb)) == perm.apply(p->mul(ca, cb)));
    CHECK(sc->add(perm.apply(ca), perm.apply(cb)) == perm.apply(p->add(ca, cb)));
  }
  CHECK(sc->add(sc->zero(), cv) == cv);

  // a swap crossing the domain boundary is rejected up front
  auto p2 = FieldPresentation::make(Tower::create(GraphOracle::finite(2, {})),
                                    PresentationMode::ColumnFaithful);
  CHECK_THROWS_AS(scramble(p2, Permutation::swaps({{p2->zero(), pi(Int(6), Int(0))}})),
                  InputFormatError);

  // adjacent-swap is domain-safe in sequential mode
  auto sq = FieldPresentation::make(tw, PresentationMode::Sequential);
  auto adj = scramble(sq, Permutation::named("adjacent-swap"));
  CHECK(adj->zero() == 1);
  CHECK(adj->one() == 0);
  Code s5 = sq->encode(TowerElem(2));
  CHECK(adj->in_domain(s5));
  CHECK(adj->mul(adj->one(), s5 % 2 == 0 ? Code(s5 + 1) : Code(s5 - 1)) ==
        (s5 % 2 == 0 ? Code(s5 + 1) : Code(s5 - 1)));
}

TEST_CASE("permutations parse from json", "[presentation]") {
  auto j = nlohmann::json::parse(R"({"type":"swaps","swaps":[[0,5],["12","900000000000000000000"]]})");
  Permutation p = Permutation::from_json(j);
  CHECK(p.apply(Int(0)) == 5);
  CHECK(p.apply(Int(5)) == 0);
  CHECK(p.apply(Int(12)) == Int("900000000000000000000"));
  CHECK(p.apply(Int(7)) == 7);
  CHECK(Permutation::from_json(nlohmann::json::parse(R"({"type":"named","rule":"identity"})"))
            .apply(Int(3)) == 3);
  CHECK_THROWS_AS(Permutation::from_json(nlohmann::json::parse(R"({"type":"swaps","swaps":[[1,1],[1,2]]})")),
                  InputFormatError);
  CHECK_THROWS_AS(Permutation::from_json(nlohmann::json::parse(R"(["not","an","object"])")),
                  InputFormatError);
  CHECK_THROWS_AS(Permutation::named("bogus"), InputFormatError);
}

TEST_CASE("dump and replay round-trip the oracle surface", "[presentation]") {
  auto tw = path3_tower();
  auto sq = FieldPresentation::make(tw, PresentationMode::Sequential);
  std::ostringstream os;
  dump_presentation(*sq, Int(12), os);
  std::istringstream is(os.str());
  ReplaySurface replay(is);
  CHECK(replay.zero() == sq->zero());
  CHECK(replay.one() == sq->one());
  for (Int a = 0; a < 12; ++a)
    for (Int b = 0; b < 12; ++b) {
      CHECK(replay.add(a, b) == sq->add(a, b));
      CHECK(replay.sub(a, b) == sq->sub(a, b));
      CHECK(replay.mul(a, b) == sq->mul(a, b));
    }
  CHECK_THROWS_AS(replay.mul(Int(0), Int(50)), CodeOutOfDomain);
  CHECK(os.str().find("# serialization: 1") != std::string::npos);
  CHECK(os.str().find("sequential presentation") != std::string::npos);
  std::istringstream bad("zero = 0\n1 + 1 = nope\n");
  CHECK_THROWS_AS(ReplaySurface(bad), InputFormatError);
}
