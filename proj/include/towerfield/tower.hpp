#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "towerfield/curves.hpp"
#include "towerfield/errors.hpp"
#include "towerfield/graph_oracle.hpp"
#include "towerfield/polynomial.hpp"
#include "towerfield/rational.hpp"
#include "towerfield/rational_function.hpp"

namespace towerfield {

class Tower;
struct ExtData;

/// Minimal support of a tower element: m X-levels (vertices 0..m-1) plus
/// Z-levels up to pair index s.  X-levels sit below all Z-levels.
struct Support {
  int m = 0;
  int s = 0;
  friend bool operator==(Support a, Support b) { return a.m == b.m && a.s == b.s; }
  friend bool operator!=(Support a, Support b) { return !(a == b); }
};

/// Column assignment of the code space: column 0 for rationals, column 2m
/// for elements topped by X-level m (vertex m-1), column 2s-1 for elements
/// topped by Z-level s.
inline long column_of(Support sup) {
  if (sup.s > 0) return 2L * sup.s - 1;
  if (sup.m > 0) return 2L * sup.m;
  return 0;
}

/// One extension step.  X(m), m >= 1, adjoins the function field of the
/// plane curve p = 0 with generators (u_{m-1}, v_{m-1}); Z(k), k >= 1,
/// adjoins the curve q(t_k, x, y) = 0 with generators (x_k, y_k).
struct LevelRef {
  bool is_z = false;
  int index = 0;
  friend bool operator==(LevelRef a, LevelRef b) {
    return a.is_z == b.is_z && a.index == b.index;
  }
};

enum class GenKind { U, V, X, Y };

/// Element of the tower field in canonical normal form.
///
/// Representation: a rational number (support (0,0)), or a top extension
/// level holding 4 coefficients for powers 0..3 of that level's algebraic
/// generator; each coefficient is a canonical rational function in the
/// level's transcendental generator over elements strictly below the level.
/// Unreferenced intermediate levels are never materialized.
///
/// Canonical-form invariants: every stored RatFn is canonical, every stored
/// sub-element is canonical, and the top level is nontrivial (nonzero
/// algebraic part, or non-constant transcendental part).  Equality is
/// therefore structural.
class TowerElem {
 public:
  TowerElem() = default;
  TowerElem(long v) : rat_(v) {}
  explicit TowerElem(Rat r) : rat_(std::move(r)) {}

  bool is_rational() const { return ext_ == nullptr; }
  bool is_zero() const { return is_rational() && rat_.is_zero(); }
  bool is_one() const { return is_rational() && rat_.is_one(); }

  const Rat& rational_value() const {
    if (!is_rational()) throw std::domain_error("TowerElem: not rational");
    return rat_;
  }

  Support support() const { return {m_, s_}; }
  LevelRef top_level() const {
    if (s_ > 0) return {true, s_};
    return {false, m_};
  }
  /// Tower handle; null only for pure rationals.
  const std::shared_ptr<const Tower>& tower() const { return tower_; }
  /// Coefficients of powers 0..3 of the top algebraic generator.
  /// Only valid when !is_rational().
  const std::array<RatFn<TowerElem>, 4>& ext() const;

  /// Assemble an element topped at the given level from coefficient data,
  /// canonicalizing (a trivial top collapses to the inner element).  The
  /// codec's deserializer and the arithmetic engine both funnel through here.
  static TowerElem from_level(std::shared_ptr<const Tower> tower, LevelRef top,
                              std::array<RatFn<TowerElem>, 4> coeffs);

  TowerElem operator-() const;
  friend TowerElem operator+(const TowerElem& a, const TowerElem& b) {
    return arith(a, b, 0);
  }
  friend TowerElem operator-(const TowerElem& a, const TowerElem& b) {
    return arith(a, b, 1);
  }
  friend TowerElem operator*(const TowerElem& a, const TowerElem& b) {
    return arith(a, b, 2);
  }
  friend TowerElem operator/(const TowerElem& a, const TowerElem& b);
  TowerElem inv() const;

  friend bool operator==(const TowerElem& a, const TowerElem& b);
  friend bool operator!=(const TowerElem& a, const TowerElem& b) { return !(a == b); }

 private:
  static TowerElem arith(const TowerElem& a, const TowerElem& b, int op);
  static std::array<RatFn<TowerElem>, 4> as_top(const TowerElem& e, LevelRef top);

  int m_ = 0;
  int s_ = 0;
  Rat rat_;
  std::shared_ptr<const ExtData> ext_;
  std::shared_ptr<const Tower> tower_;
};

/// Coefficient block of a non-rational element.
struct ExtData {
  std::array<RatFn<TowerElem>, 4> coeffs;
};

/// Monic gcd in one transcendental over the tower field; declared ahead of
/// the arithmetic so every RatFn<TowerElem>::reduce instantiation resolves
/// to it (the generic Euclidean ladder is ruinous here).  Defined below.
inline Poly<TowerElem> poly_gcd(const Poly<TowerElem>& a,
                                const Poly<TowerElem>& b);

inline const std::array<RatFn<TowerElem>, 4>& TowerElem::ext() const {
  if (!ext_) throw std::domain_error("TowerElem: rational element has no extension data");
  return ext_->coeffs;
}

/// The tower over one graph: pair bookkeeping, minimal polynomials
/// (memoized), and generator factories.  Levels materialize lazily; any
/// single element touches finitely many.
namespace detail {

/// Scalar arithmetic mod p = 2^61 - 1 for the modular coprimality probe.
constexpr uint64_t kModP = 2305843009213693951ULL;

inline uint64_t mod_add(uint64_t a, uint64_t b) {
  uint64_t s = a + b;
  return s >= kModP ? s - kModP : s;
}
inline uint64_t mod_sub(uint64_t a, uint64_t b) { return a >= b ? a - b : a + kModP - b; }
inline uint64_t mod_mul(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % kModP);
}
inline uint64_t mod_pow(uint64_t b, uint64_t e) {
  uint64_t r = 1;
  for (; e; e >>= 1) {
    if (e & 1) r = mod_mul(r, b);
    b = mod_mul(b, b);
  }
  return r;
}
inline uint64_t mod_inv_scalar(uint64_t a) { return mod_pow(a, kModP - 2); }
/// Image of a rational mod p; empty when p divides the denominator.
inline std::optional<uint64_t> mod_of_rat(const Rat& r) {
  const uint64_t d = mpz_fdiv_ui(r.denominator().get_mpz_t(), kModP);
  if (d == 0) return std::nullopt;
  const uint64_t n = mpz_fdiv_ui(r.numerator().get_mpz_t(), kModP);
  return mod_mul(n, mod_inv_scalar(d));
}

/// Fixed random evaluation of the tower mod p: scalars for transcendentals
/// and the induced reduction rule of each algebraic generator's quartic
/// (whose coefficients all evaluate to scalars, since no minimal polynomial
/// mentions another level's algebraic generator).
struct ModData {
  std::vector<uint64_t> u_val;                 // X-level i at slot i-1
  std::vector<uint64_t> x_val;                 // Z-level k at slot k-1
  std::vector<std::array<uint64_t, 4>> x_red;  // v^4 rewrite rule per X level
  std::vector<std::array<uint64_t, 4>> z_red;  // y^4 rewrite rule per Z level
};

}  // namespace detail

class Tower : public std::enable_shared_from_this<Tower> {
 public:
  static std::shared_ptr<const Tower> create(GraphOracle graph) {
    return std::shared_ptr<const Tower>(new Tower(std::move(graph)));
  }

  const GraphOracle& graph() const { return graph_; }

  /// Pair index of vertices i > j in lexicographic order: k = i(i-1)/2 + j + 1.
  static int pair_index(int i, int j) {
    if (i == j) throw std::invalid_argument("Tower: pair needs distinct vertices");
    int hi = std::max(i, j), lo = std::min(i, j);
    return hi * (hi - 1) / 2 + lo + 1;
  }
  /// Inverse of pair_index: k >= 1 -> (i, j) with i > j.
  static std::pair<int, int> pair_vertices(int k) {
    if (k < 1) throw std::invalid_argument("Tower: pair index must be >= 1");
    int i = 1;
    while (i * (i + 1) / 2 < k) ++i;
    int j = k - i * (i - 1) / 2 - 1;
    return {i, j};
  }
  /// X-levels needed before Z-level s can exist: highest vertex of pair s,
  /// plus one.  Monotone in s because pairs are in lexicographic order.
  static int min_m_for_pairs(int s) {
    if (s <= 0) return 0;
    return pair_vertices(s).first + 1;
  }

  /// Edge kind of pair k per the graph oracle.
  bool pair_is_edge(int k) const {
    auto [i, j] = pair_vertices(k);
    return graph_.edge(i, j);
  }

  void check_vertex(int i) const {
    if (i < 0) throw VertexOutOfRange("negative vertex " + std::to_string(i));
    if (graph_.is_finite() && i >= graph_.vertex_count()) {
      throw VertexOutOfRange("vertex " + std::to_string(i) + " outside 0.." +
                             std::to_string(graph_.vertex_count() - 1));
    }
  }

  /// Transcendental generator u_i of X-level i+1.
  TowerElem u(int i) const;
  /// Algebraic generator v_i of X-level i+1.
  TowerElem v(int i) const;
  /// Transcendental generator x_k of the Z-level for pair {i,j}.
  TowerElem x(int i, int j) const;
  /// Algebraic generator y_k of the Z-level for pair {i,j}.
  TowerElem y(int i, int j) const;
  TowerElem gen(GenKind kind, int i, int j = -1) const;

  /// Curve parameter of the pair's Z-level: u_i * u_j on an edge,
  /// u_i + u_j on a non-edge.  Symmetric in (i, j).
  TowerElem t_param(int i, int j) const;

  /// Monic minimal polynomial of v_{m-1} over Q(u_{m-1}) lifted to the
  /// tower; identical at every X-level.
  const Poly<RatFn<TowerElem>>& x_min_poly() const;
  /// Monic minimal polynomial of y_k over the field below extended by x_k.
  const Poly<RatFn<TowerElem>>& z_min_poly(int k) const;

  const Poly<RatFn<TowerElem>>& min_poly(LevelRef level) const {
    return level.is_z ? z_min_poly(level.index) : x_min_poly();
  }

  /// Copy of the modular evaluation data covering X-levels up to need_m and
  /// Z-levels up to need_z, extending it first if necessary.
  detail::ModData mod_snapshot(int need_m, int need_z) const {
    std::scoped_lock lk(memo_mutex_);
    if (need_z > 0) need_m = std::max(need_m, min_m_for_pairs(need_z));
    const uint64_t inv5 = detail::mod_inv_scalar(5);
    const uint64_t inv10 = detail::mod_inv_scalar(10);
    auto draw = [this] {
      return 2 + mod_rng_() % (detail::kModP - 3);  // avoid 0 and 1
    };
    while (static_cast<int>(mod_.u_val.size()) < need_m) {
      const uint64_t r = draw();
      mod_.u_val.push_back(r);
      // v^4 = -(8/5) r v^3 - (8/5) v - (r^4 - 4)/10
      const uint64_t c85 = detail::mod_mul(8, inv5);
      mod_.x_red.push_back({detail::mod_sub(0, detail::mod_mul(inv10, detail::mod_sub(detail::mod_pow(r, 4), 4))),
                            detail::mod_sub(0, c85), 0,
                            detail::mod_sub(0, detail::mod_mul(c85, r))});
    }
    while (static_cast<int>(mod_.x_val.size()) < need_z) {
      const int k = static_cast<int>(mod_.x_val.size()) + 1;
      auto [hi, lo] = pair_vertices(k);
      const uint64_t ui = mod_.u_val[static_cast<size_t>(hi)];
      const uint64_t uj = mod_.u_val[static_cast<size_t>(lo)];
      const uint64_t t = pair_is_edge(k) ? detail::mod_mul(ui, uj) : detail::mod_add(ui, uj);
      const uint64_t xv = draw();
      mod_.x_val.push_back(xv);
      // y^4 = -t x y^3 - t y - (1 + t)(x^4 + 1)
      const uint64_t t1 = detail::mod_add(t, 1);
      mod_.z_red.push_back({detail::mod_sub(0, detail::mod_mul(t1, detail::mod_add(detail::mod_pow(xv, 4), 1))),
                            detail::mod_sub(0, t), 0,
                            detail::mod_sub(0, detail::mod_mul(t, xv))});
    }
    return mod_;
  }

 private:
  explicit Tower(GraphOracle graph) : graph_(std::move(graph)) {}

  GraphOracle graph_;
  mutable std::mutex memo_mutex_;
  mutable std::optional<Poly<RatFn<TowerElem>>> x_mp_;
  mutable std::map<int, Poly<RatFn<TowerElem>>> z_mp_;
  mutable std::mt19937_64 mod_rng_{0x746f776572666cULL};
  mutable detail::ModData mod_;
};

// ---- TowerElem implementation ----

inline std::array<RatFn<TowerElem>, 4> TowerElem::as_top(const TowerElem& e,
                                                         LevelRef top) {
  if (!e.is_rational() && e.top_level() == top) return e.ext_->coeffs;
  // e lives strictly below `top`: embed as the constant coefficient.
  return {RatFn<TowerElem>(e), RatFn<TowerElem>(), RatFn<TowerElem>(),
          RatFn<TowerElem>()};
}

inline TowerElem TowerElem::from_level(std::shared_ptr<const Tower> tower,
                                       LevelRef top,
                                       std::array<RatFn<TowerElem>, 4> coeffs) {
  const bool algebraic_trivial =
      coeffs[1].is_zero() && coeffs[2].is_zero() && coeffs[3].is_zero();
  if (algebraic_trivial && coeffs[0].is_constant()) {
    return coeffs[0].constant_value();
  }
  TowerElem r;
  if (top.is_z) {
    r.s_ = top.index;
    int m = Tower::min_m_for_pairs(top.index);
    for (const auto& rf : coeffs) {
      for (const auto& poly : {rf.num(), rf.den()}) {
        for (const auto& c : poly.coeffs()) m = std::max(m, c.m_);
      }
    }
    r.m_ = m;
  } else {
    r.m_ = top.index;
    r.s_ = 0;
  }
  r.ext_ = std::make_shared<const ExtData>(ExtData{std::move(coeffs)});
  r.tower_ = std::move(tower);
  return r;
}

inline TowerElem TowerElem::operator-() const {
  if (is_rational()) return TowerElem(-rat_);
  std::array<RatFn<TowerElem>, 4> c = ext_->coeffs;
  for (auto& rf : c) rf = -rf;
  TowerElem r(*this);
  r.ext_ = std::make_shared<const ExtData>(ExtData{std::move(c)});
  return r;
}

inline TowerElem TowerElem::arith(const TowerElem& a, const TowerElem& b, int op) {
  if (a.is_rational() && b.is_rational()) {
    switch (op) {
      case 0: return TowerElem(a.rat_ + b.rat_);
      case 1: return TowerElem(a.rat_ - b.rat_);
      default: return TowerElem(a.rat_ * b.rat_);
    }
  }
  std::shared_ptr<const Tower> tower = a.tower_ ? a.tower_ : b.tower_;
  if (a.tower_ && b.tower_ && a.tower_ != b.tower_) {
    throw std::invalid_argument("TowerElem: operands from different towers");
  }
  LevelRef top;
  if (std::max(a.s_, b.s_) > 0) {
    top = {true, std::max(a.s_, b.s_)};
  } else {
    top = {false, std::max(a.m_, b.m_)};
  }
  std::array<RatFn<TowerElem>, 4> ca = as_top(a, top);
  std::array<RatFn<TowerElem>, 4> cb = as_top(b, top);
  std::array<RatFn<TowerElem>, 4> out;
  if (op == 0 || op == 1) {
    for (int i = 0; i < 4; ++i) {
      out[i] = (op == 0) ? ca[i] + cb[i] : ca[i] - cb[i];
    }
  } else {
    Poly<RatFn<TowerElem>> pa{std::vector<RatFn<TowerElem>>(ca.begin(), ca.end())};
    Poly<RatFn<TowerElem>> pb{std::vector<RatFn<TowerElem>>(cb.begin(), cb.end())};
    Poly<RatFn<TowerElem>> rem = divmod(pa * pb, tower->min_poly(top)).second;
    for (int i = 0; i < 4; ++i) out[i] = rem.coeff(i);
  }
  return from_level(std::move(tower), top, std::move(out));
}

namespace detail {

template <typename K>
Poly<K> ring_pow(const Poly<K>& base, int e) {
  Poly<K> acc(K(1));
  for (int i = 0; i < e; ++i) acc = acc * base;
  return acc;
}

/// Coefficient-wise exact division of p (in y over K[x]) by the scalar d in
/// K[x]; nullopt when any division leaves a remainder.
template <typename K>
std::optional<Poly<Poly<K>>> exact_div_scalar(const Poly<Poly<K>>& p,
                                              const Poly<K>& d) {
  if (d.is_one()) return p;
  std::vector<Poly<K>> out;
  out.reserve(static_cast<size_t>(p.degree()) + 1);
  for (int i = 0; i <= p.degree(); ++i) {
    if (p.coeff(i).is_zero()) {
      out.emplace_back();
      continue;
    }
    auto [q, r] = divmod(p.coeff(i), d);
    if (!r.is_zero()) return std::nullopt;
    out.push_back(std::move(q));
  }
  return Poly<Poly<K>>(std::move(out));
}

/// Half-extended fraction-free Bezout step for inversion modulo M: given
/// denominator-free A and M in K[x][y], returns (N, S) with S*A = N (mod M)
/// and N a scalar in K[x].  N = 0 signals a nontrivial common factor.
///
/// The remainder sequence carries subresultant-style divisors to suppress
/// coefficient growth (the naive Euclidean ladder over nested fraction
/// fields blows up); every division is guarded, so correctness never rests
/// on the divisibility theory.  The invariant throughout is c * r = s * A
/// modulo M with c a scalar.
template <typename K>
std::pair<Poly<K>, Poly<Poly<K>>> half_ext_bezout(const Poly<Poly<K>>& A,
                                                  const Poly<Poly<K>>& M) {
  using PX = Poly<K>;
  using PXY = Poly<PX>;
  const PX one(K(1));
  PXY r_prev = M, r_cur = A;
  PXY s_prev, s_cur = PXY(one);
  PX c_prev = one, c_cur = one;
  PX g = one, h = one;
  bool subres_ok = true;
  while (!r_cur.is_zero() && r_cur.degree() > 0) {
    const int delta = r_prev.degree() - r_cur.degree();
    auto [q, r_tilde] = pseudo_divmod(r_prev, r_cur);
    const PX l = r_cur.leading();
    PXY s_tilde = s_prev * (c_cur * ring_pow(l, delta + 1)) - (q * s_cur) * c_prev;
    PX c_tilde = c_prev * c_cur;
    PXY r_next = std::move(r_tilde);
    PX c_next = std::move(c_tilde);
    if (subres_ok) {
      const PX beta = g * ring_pow(h, delta);
      if (auto divided = exact_div_scalar(r_next, beta)) {
        r_next = std::move(*divided);
        c_next = c_next * beta;
        g = l;
        if (delta >= 1) {
          PX hn = ring_pow(l, delta);
          if (delta >= 2) {
            auto [hq, hr] = divmod(hn, ring_pow(h, delta - 1));
            if (hr.is_zero()) {
              hn = std::move(hq);
            } else {
              subres_ok = false;
            }
          }
          h = std::move(hn);
        }
      } else {
        subres_ok = false;
      }
    }
    r_prev = std::move(r_cur);
    s_prev = std::move(s_cur);
    c_prev = std::move(c_cur);
    r_cur = std::move(r_next);
    s_cur = std::move(s_tilde);
    c_cur = std::move(c_next);
  }
  if (r_cur.is_zero()) return {PX(), PXY()};
  return {c_cur * r_cur.coeff(0), s_cur};
}

}  // namespace detail

inline TowerElem TowerElem::inv() const {
  if (is_zero()) throw DivisionByZero("TowerElem: inverse of zero");
  if (is_rational()) return TowerElem(rat_.inv());
  const LevelRef top = top_level();
  const auto& co = ext_->coeffs;
  if (co[1].is_zero() && co[2].is_zero() && co[3].is_zero()) {
    // no algebraic part at the top: plain rational-function inverse
    return from_level(tower_, top,
                      {co[0].inv(), RatFn<TowerElem>(), RatFn<TowerElem>(),
                       RatFn<TowerElem>()});
  }
  if (co[2].is_zero() && co[3].is_zero()) {
    // linear in the algebraic generator: one division against the quartic
    // gives r = M - q*A constant, so inv(A) = -q / r.  Every intermediate
    // here is a reduced fraction; the denominator-clearing route below can
    // blow up on the adjugate content these elements produce.
    using KF = RatFn<TowerElem>;
    const Poly<KF> A(std::vector<KF>{co[0], co[1]});
    auto [q, r] = divmod(tower_->min_poly(top), A);
    if (r.is_zero()) {
      throw InternalReducibility(
          "TowerElem: minimal polynomial split during inversion");
    }
    const KF scale = -(r.coeff(0).inv());
    std::array<KF, 4> out;
    for (int i = 0; i <= q.degree(); ++i) {
      if (!q.coeff(i).is_zero()) out[static_cast<size_t>(i)] = q.coeff(i) * scale;
    }
    return from_level(tower_, top, std::move(out));
  }
  using PX = Poly<TowerElem>;
  using PXY = Poly<PX>;
  // clear the top-transcendental denominators: acoef[i] = num_i * prod_{j!=i} den_j
  PX d_all(TowerElem(1));
  for (const auto& rf : co) {
    if (!rf.den().is_one()) d_all = d_all * rf.den();
  }
  std::vector<PX> acoef(4);
  for (int i = 0; i < 4; ++i) {
    if (co[i].is_zero()) continue;
    PX m(TowerElem(1));
    for (int j = 0; j < 4; ++j) {
      if (j != i && !co[j].den().is_one()) m = m * co[j].den();
    }
    acoef[i] = co[i].num() * m;
  }
  PXY A(std::move(acoef));
  const auto& mp = tower_->min_poly(top);
  std::vector<PX> mcoef(5);
  for (int j = 0; j <= 4; ++j) mcoef[static_cast<size_t>(j)] = mp.coeff(j).num();
  PXY M(std::move(mcoef));

  auto [N, S] = detail::half_ext_bezout(A, M);
  if (N.is_zero()) {
    throw InternalReducibility(
        "TowerElem: minimal polynomial split during inversion");
  }
  // S * A = N (mod M) and A = elem * d_all, so elem * (S * d_all / N) = 1.
  std::array<RatFn<TowerElem>, 4> out;
  for (int i = 0; i < 4; ++i) {
    if (S.coeff(i).is_zero()) continue;
    out[i] = RatFn<TowerElem>(S.coeff(i) * d_all, N);
  }
  return from_level(tower_, top, std::move(out));
}

inline TowerElem operator/(const TowerElem& a, const TowerElem& b) {
  if (b.is_zero()) throw DivisionByZero("TowerElem: division by zero");
  return a * b.inv();
}

inline bool operator==(const TowerElem& a, const TowerElem& b) {
  if (a.m_ != b.m_ || a.s_ != b.s_) return false;
  if (a.is_rational()) return b.is_rational() && a.rat_ == b.rat_;
  if (b.is_rational()) return false;
  if (a.ext_ == b.ext_) return true;
  return a.ext_->coeffs == b.ext_->coeffs;
}

/// Decidable equality of canonical forms.
inline bool eq(const TowerElem& a, const TowerElem& b) { return a == b; }

namespace detail {

/// Membership in the den-free subring: every nested rational-function
/// denominator is 1 (rational scalar denominators are harmless).  Ring
/// operations preserve this because all minimal polynomials are monic with
/// den-free coefficients, so products reduce without introducing fractions.
inline bool elem_den_free(const TowerElem& e) {
  if (e.is_rational()) return true;
  for (const auto& rf : e.ext()) {
    if (rf.is_zero()) continue;
    if (!rf.den().is_one()) return false;
    for (int j = 0; j <= rf.num().degree(); ++j) {
      if (!elem_den_free(rf.num().coeff(j))) return false;
    }
  }
  return true;
}

inline TowerElem elem_pow(const TowerElem& b, int e) {
  TowerElem r(1);
  for (; e > 0; --e) r = r * b;
  return r;
}

std::pair<TowerElem, TowerElem> flatten_fraction(const TowerElem& e);

/// p scaled into the den-free subring: returns (P, d) with P = p * d, d a
/// den-free element, all coefficients of P den-free.  Products only; no gcd
/// ever runs here.
inline std::pair<Poly<TowerElem>, TowerElem> clear_poly_denfree(
    const Poly<TowerElem>& p) {
  if (p.is_zero()) return {p, TowerElem(1)};
  const int d = p.degree();
  std::vector<TowerElem> nums(static_cast<size_t>(d) + 1);
  std::vector<TowerElem> dens(static_cast<size_t>(d) + 1);
  bool trivial = true;
  for (int j = 0; j <= d; ++j) {
    auto [pj, dj] = flatten_fraction(p.coeff(j));
    if (!dj.is_one()) trivial = false;
    nums[static_cast<size_t>(j)] = std::move(pj);
    dens[static_cast<size_t>(j)] = std::move(dj);
  }
  if (trivial) return {Poly<TowerElem>(std::move(nums)), TowerElem(1)};
  std::vector<TowerElem> pre(static_cast<size_t>(d) + 2);
  std::vector<TowerElem> suf(static_cast<size_t>(d) + 2);
  pre[0] = TowerElem(1);
  for (int j = 0; j <= d; ++j)
    pre[static_cast<size_t>(j) + 1] = pre[static_cast<size_t>(j)] * dens[static_cast<size_t>(j)];
  suf[static_cast<size_t>(d) + 1] = TowerElem(1);
  for (int j = d; j >= 0; --j)
    suf[static_cast<size_t>(j)] = dens[static_cast<size_t>(j)] * suf[static_cast<size_t>(j) + 1];
  std::vector<TowerElem> out(static_cast<size_t>(d) + 1);
  for (int j = 0; j <= d; ++j) {
    out[static_cast<size_t>(j)] =
        nums[static_cast<size_t>(j)] * pre[static_cast<size_t>(j)] * suf[static_cast<size_t>(j) + 1];
  }
  return {Poly<TowerElem>(std::move(out)), pre[static_cast<size_t>(d) + 1]};
}

/// e rewritten as a fraction P/D of den-free elements.  Pure structural
/// rewrite by common-denominator products.
inline std::pair<TowerElem, TowerElem> flatten_fraction(const TowerElem& e) {
  if (e.is_rational()) return {e, TowerElem(1)};
  const LevelRef top = e.top_level();
  const auto& co = e.ext();
  std::array<Poly<TowerElem>, 4> an, bn;  // co[i] = an[i] / bn[i], den-free
  bool all_trivial = true;
  for (int i = 0; i < 4; ++i) {
    if (co[i].is_zero()) {
      bn[static_cast<size_t>(i)] = Poly<TowerElem>(TowerElem(1));
      continue;
    }
    auto [np, nd] = clear_poly_denfree(co[i].num());
    auto [dp, dd] = clear_poly_denfree(co[i].den());
    an[static_cast<size_t>(i)] = nd.is_one() && dd.is_one() ? std::move(np) : np * dd;
    bn[static_cast<size_t>(i)] = nd.is_one() ? std::move(dp) : dp * nd;
    if (!bn[static_cast<size_t>(i)].is_one()) all_trivial = false;
  }
  if (all_trivial) {
    std::array<RatFn<TowerElem>, 4> pc;
    for (int i = 0; i < 4; ++i) {
      if (!co[i].is_zero()) pc[static_cast<size_t>(i)] = RatFn<TowerElem>(an[static_cast<size_t>(i)]);
    }
    return {TowerElem::from_level(e.tower(), top, std::move(pc)), TowerElem(1)};
  }
  // e = [sum_i an_i * prod_{k != i} bn_k * g^i] / prod_i bn_i
  Poly<TowerElem> dprod(TowerElem(1));
  for (int i = 0; i < 4; ++i) dprod = dprod * bn[static_cast<size_t>(i)];
  std::array<RatFn<TowerElem>, 4> pc;
  for (int i = 0; i < 4; ++i) {
    if (co[i].is_zero()) continue;
    Poly<TowerElem> t = an[static_cast<size_t>(i)];
    for (int k = 0; k < 4; ++k) {
      if (k != i) t = t * bn[static_cast<size_t>(k)];
    }
    pc[static_cast<size_t>(i)] = RatFn<TowerElem>(std::move(t));
  }
  TowerElem num = TowerElem::from_level(e.tower(), top, std::move(pc));
  TowerElem den = TowerElem::from_level(
      e.tower(), top,
      {RatFn<TowerElem>(std::move(dprod)), RatFn<TowerElem>(), RatFn<TowerElem>(),
       RatFn<TowerElem>()});
  return {num, den};
}

/// Modular image of the tower: one tensor axis per algebraic generator in
/// play, each a quartic quotient of F_p[w] whose reduction rule has scalar
/// coefficients (transcendentals are pinned to the ModData scalars).  An
/// element is a flat vector of 4^d scalars; digit j of an index is the
/// exponent of axis j's generator, axis j has stride 4^j.  Axes follow the
/// tower order, so an element's image occupies only the axes at or below
/// its own top level.
struct ModAxes {
  std::vector<LevelRef> levels;                  // tower order, lowest first
  std::vector<std::array<uint64_t, 4>> red;      // w^4 rewrite per axis
  std::vector<std::array<uint64_t, 4>> red5;     // w^5 rewrite per axis
  std::vector<std::array<uint64_t, 4>> red6;     // w^6 rewrite per axis
  size_t n = 1;                                  // 4^(number of axes)

  int axis_of(LevelRef level) const {
    for (size_t j = 0; j < levels.size(); ++j) {
      if (levels[j] == level) return static_cast<int>(j);
    }
    return -1;
  }
};

inline ModAxes build_mod_axes(const std::vector<LevelRef>& levels,
                              const ModData& md) {
  ModAxes ax;
  ax.levels = levels;
  for (const LevelRef& lv : levels) {
    const auto& r = lv.is_z ? md.z_red[static_cast<size_t>(lv.index) - 1]
                            : md.x_red[static_cast<size_t>(lv.index) - 1];
    // w^5 = w * w^4 and w^6 = w * w^5, re-reduced through the quartic rule.
    std::array<uint64_t, 4> r5{mod_mul(r[3], r[0]),
                               mod_add(mod_mul(r[3], r[1]), r[0]),
                               mod_add(mod_mul(r[3], r[2]), r[1]),
                               mod_add(mod_mul(r[3], r[3]), r[2])};
    std::array<uint64_t, 4> r6{mod_mul(r5[3], r[0]),
                               mod_add(mod_mul(r5[3], r[1]), r5[0]),
                               mod_add(mod_mul(r5[3], r[2]), r5[1]),
                               mod_add(mod_mul(r5[3], r[3]), r5[2])};
    ax.red.push_back(r);
    ax.red5.push_back(r5);
    ax.red6.push_back(r6);
    ax.n *= 4;
  }
  return ax;
}

using ModVec = std::vector<uint64_t>;

inline void tensor_add_into(ModVec& a, const ModVec& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] = mod_add(a[i], b[i]);
}

inline void tensor_scale(ModVec& a, uint64_t c) {
  for (uint64_t& x : a) x = mod_mul(x, c);
}

inline bool tensor_is_zero(const ModVec& a) {
  for (uint64_t x : a) {
    if (x != 0) return false;
  }
  return true;
}

/// Product along axes 0..axis (blocks above are the caller's concern).
/// Convolution in the top axis gives degrees up to 6, folded back through
/// the precomputed w^4..w^6 rules; 16 recursive sub-products per axis.
inline void tensor_mul_rec(const uint64_t* a, const uint64_t* b, uint64_t* out,
                           const ModAxes& ax, int axis) {
  if (axis < 0) {
    out[0] = mod_mul(a[0], b[0]);
    return;
  }
  const size_t stride = size_t{1} << (2 * axis);
  std::vector<ModVec> conv(7, ModVec(stride, 0));
  ModVec tmp(stride, 0);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      tensor_mul_rec(a + static_cast<size_t>(i) * stride,
                     b + static_cast<size_t>(j) * stride, tmp.data(), ax,
                     axis - 1);
      tensor_add_into(conv[static_cast<size_t>(i + j)], tmp);
    }
  }
  const std::array<const std::array<uint64_t, 4>*, 3> rules = {
      &ax.red[static_cast<size_t>(axis)], &ax.red5[static_cast<size_t>(axis)],
      &ax.red6[static_cast<size_t>(axis)]};
  for (int k = 4; k <= 6; ++k) {
    const auto& rule = *rules[static_cast<size_t>(k - 4)];
    for (int t = 0; t < 4; ++t) {
      if (rule[static_cast<size_t>(t)] == 0) continue;
      ModVec scaled = conv[static_cast<size_t>(k)];
      tensor_scale(scaled, rule[static_cast<size_t>(t)]);
      tensor_add_into(conv[static_cast<size_t>(t)], scaled);
    }
  }
  for (int t = 0; t < 4; ++t) {
    std::copy(conv[static_cast<size_t>(t)].begin(),
              conv[static_cast<size_t>(t)].end(),
              out + static_cast<size_t>(t) * stride);
  }
}

inline ModVec tensor_mul(const ModVec& a, const ModVec& b, const ModAxes& ax) {
  ModVec out(ax.n, 0);
  tensor_mul_rec(a.data(), b.data(), out.data(),
                 ax, static_cast<int>(ax.levels.size()) - 1);
  return out;
}

/// Inverse in the tensor ring, by half-extended Euclid against the top
/// axis's quartic over the sub-ring of lower axes; empty on any zero
/// divisor.  A successful result satisfies a * result = 1 by construction.
inline std::optional<ModVec> tensor_inv_rec(const ModVec& a, const ModAxes& ax,
                                            int axis) {
  if (tensor_is_zero(a)) return std::nullopt;
  if (axis < 0) return ModVec{mod_inv_scalar(a[0])};
  const size_t stride = size_t{1} << (2 * axis);
  auto block = [&](const ModVec& v, int i) {
    return ModVec(v.begin() + static_cast<long>(static_cast<size_t>(i) * stride),
                  v.begin() + static_cast<long>(static_cast<size_t>(i + 1) * stride));
  };
  auto deg_of = [&](const std::vector<ModVec>& p) {
    for (int d = static_cast<int>(p.size()) - 1; d >= 0; --d) {
      if (!tensor_is_zero(p[static_cast<size_t>(d)])) return d;
    }
    return -1;
  };
  auto sub_mul = [&](const ModVec& x, const ModVec& y) {
    ModVec out(stride, 0);
    tensor_mul_rec(x.data(), y.data(), out.data(), ax, axis - 1);
    return out;
  };
  // Pure sub-ring fast path: invert block 0 alone.
  bool top_free = true;
  for (int i = 1; i < 4 && top_free; ++i) {
    if (!tensor_is_zero(block(a, i))) top_free = false;
  }
  if (top_free) {
    auto b0 = tensor_inv_rec(block(a, 0), ax, axis - 1);
    if (!b0) return std::nullopt;
    ModVec out(4 * stride, 0);
    std::copy(b0->begin(), b0->end(), out.begin());
    return out;
  }
  // r0 = w^4 - rule (the axis quartic), r1 = a as a cubic in w; maintain
  // s1 with s1 * a = r1 modulo the quartic (s0 tracking is not needed for
  // a half-extended chain).
  const auto& rule = ax.red[static_cast<size_t>(axis)];
  std::vector<ModVec> r0(5, ModVec(stride, 0)), r1(4, ModVec(stride, 0));
  r0[4][0] = 1;
  for (int i = 0; i < 4; ++i) {
    if (rule[static_cast<size_t>(i)] != 0) {
      r0[static_cast<size_t>(i)][0] = mod_sub(0, rule[static_cast<size_t>(i)]);
    }
  }
  for (int i = 0; i < 4; ++i) r1[static_cast<size_t>(i)] = block(a, i);
  std::vector<ModVec> s0(1, ModVec(stride, 0)), s1(1, ModVec(stride, 0));
  s1[0][0] = 1;
  while (true) {
    const int d1 = deg_of(r1);
    if (d1 < 0) return std::nullopt;  // chain died: a is a zero divisor
    auto lead_inv = tensor_inv_rec(r1[static_cast<size_t>(d1)], ax, axis - 1);
    if (!lead_inv) return std::nullopt;
    if (d1 == 0) {
      // r1 constant: s1 * a = r1, so the inverse is s1 / r1.  The chain
      // keeps deg s below deg of the quartic; treat an overflow as failure.
      for (size_t i = 4; i < s1.size(); ++i) {
        if (!tensor_is_zero(s1[i])) return std::nullopt;
      }
      std::vector<ModVec> out4(4, ModVec(stride, 0));
      for (size_t i = 0; i < s1.size() && i < 4; ++i) {
        out4[i] = sub_mul(s1[i], *lead_inv);
      }
      ModVec out(4 * stride, 0);
      for (int i = 0; i < 4; ++i) {
        std::copy(out4[static_cast<size_t>(i)].begin(),
                  out4[static_cast<size_t>(i)].end(),
                  out.begin() + static_cast<long>(static_cast<size_t>(i) * stride));
      }
      return out;
    }
    // Divide r0 by r1, updating (r0, s0) to the remainder pair.
    int d0 = deg_of(r0);
    while (d0 >= d1) {
      ModVec q = sub_mul(r0[static_cast<size_t>(d0)], *lead_inv);
      for (int j = 0; j <= d1; ++j) {
        ModVec t = sub_mul(q, r1[static_cast<size_t>(j)]);
        ModVec& slot = r0[static_cast<size_t>(d0 - d1 + j)];
        for (size_t i = 0; i < stride; ++i) slot[i] = mod_sub(slot[i], t[i]);
      }
      const size_t qs = static_cast<size_t>(d0 - d1);
      if (s0.size() < qs + s1.size()) s0.resize(qs + s1.size(), ModVec(stride, 0));
      for (size_t j = 0; j < s1.size(); ++j) {
        ModVec t = sub_mul(q, s1[j]);
        ModVec& slot = s0[qs + j];
        for (size_t i = 0; i < stride; ++i) slot[i] = mod_sub(slot[i], t[i]);
      }
      const int nd = deg_of(r0);
      if (nd >= d0) return std::nullopt;  // no cancellation: bad lead inverse
      d0 = nd;
    }
    std::swap(r0, r1);
    std::swap(s0, s1);
  }
}

inline std::optional<ModVec> tensor_inv(const ModVec& a, const ModAxes& ax) {
  return tensor_inv_rec(a, ax, static_cast<int>(ax.levels.size()) - 1);
}

/// Record every level an element touches: maxima feed the ModData snapshot,
/// and levels whose algebraic generator actually appears become axes.
inline void collect_levels(const TowerElem& e, int& need_m, int& need_z,
                           std::set<std::pair<int, int>>& axes) {
  if (e.is_rational()) return;
  const LevelRef top = e.top_level();
  if (top.is_z) {
    need_z = std::max(need_z, top.index);
  } else {
    need_m = std::max(need_m, top.index);
  }
  const auto& co = e.ext();
  for (int i = 1; i < 4; ++i) {
    if (!co[static_cast<size_t>(i)].is_zero()) {
      axes.insert({top.is_z ? 1 : 0, top.index});
      break;
    }
  }
  auto walk_poly = [&](const Poly<TowerElem>& p) {
    for (const TowerElem& c : p.coeffs()) collect_levels(c, need_m, need_z, axes);
  };
  for (int i = 0; i < 4; ++i) {
    if (co[static_cast<size_t>(i)].is_zero()) continue;
    walk_poly(co[static_cast<size_t>(i)].num());
    walk_poly(co[static_cast<size_t>(i)].den());
  }
}

/// Image of an element in the tensor ring; empty when the evaluation hits a
/// denominator divisible by p or a non-invertible denominator image.
inline std::optional<ModVec> meval(const TowerElem& e, const ModAxes& ax,
                                   const ModData& md) {
  ModVec out(ax.n, 0);
  if (e.is_rational()) {
    auto r = mod_of_rat(e.rational_value());
    if (!r) return std::nullopt;
    out[0] = *r;
    return out;
  }
  const LevelRef top = e.top_level();
  const uint64_t tval = top.is_z ? md.x_val[static_cast<size_t>(top.index) - 1]
                                 : md.u_val[static_cast<size_t>(top.index) - 1];
  const int axis = ax.axis_of(top);
  const size_t stride = axis < 0 ? 0 : size_t{1} << (2 * axis);
  const auto& co = e.ext();
  auto eval_poly = [&](const Poly<TowerElem>& p) -> std::optional<ModVec> {
    ModVec acc(ax.n, 0);
    for (int j = p.degree(); j >= 0; --j) {
      tensor_scale(acc, tval);
      auto cj = meval(p.coeff(j), ax, md);
      if (!cj) return std::nullopt;
      tensor_add_into(acc, *cj);
    }
    return acc;
  };
  for (int i = 0; i < 4; ++i) {
    const auto& rf = co[static_cast<size_t>(i)];
    if (rf.is_zero()) continue;
    if (i > 0 && axis < 0) return std::nullopt;  // generator missing an axis
    auto nv = eval_poly(rf.num());
    if (!nv) return std::nullopt;
    if (!rf.den().is_one()) {
      auto dv = eval_poly(rf.den());
      if (!dv) return std::nullopt;
      auto di = tensor_inv(*dv, ax);
      if (!di) return std::nullopt;
      nv = tensor_mul(*nv, *di, ax);
    }
    if (i == 0) {
      tensor_add_into(out, *nv);
      continue;
    }
    // Place at digit i of the top axis: the coefficient lives strictly
    // below, so its image is confined to indices under the axis stride.
    for (size_t idx = 0; idx < ax.n; ++idx) {
      if ((*nv)[idx] == 0) continue;
      if (idx >= stride) return std::nullopt;  // support leaked upward
      const size_t at = idx + static_cast<size_t>(i) * stride;
      out[at] = mod_add(out[at], (*nv)[idx]);
    }
  }
  return out;
}

/// Degree of gcd(A, B) after one random modular evaluation.  A result of 0
/// certifies coprimality: with both leading coefficients invertible in the
/// image ring, every subresultant maps through the evaluation, so the image
/// gcd degree can only overshoot; and a unit terminal forces the resultant
/// image (a unit times a terminal power) to be nonzero.  Positive results
/// are hints only and get re-verified by exact division.  Empty means the
/// probe aborted (axis budget, p-divisible denominator, zero divisor) and
/// says nothing.
inline std::optional<int> modular_gcd_degree(const Poly<TowerElem>& A,
                                             const Poly<TowerElem>& B) {
  int need_m = 0, need_z = 0;
  std::set<std::pair<int, int>> axset;
  std::shared_ptr<const Tower> tower;
  for (const Poly<TowerElem>* p : {&A, &B}) {
    for (const TowerElem& c : p->coeffs()) {
      collect_levels(c, need_m, need_z, axset);
      if (!tower && !c.is_rational()) tower = c.tower();
    }
  }
  if (axset.size() > 6) return std::nullopt;  // tensor would be too large
  ModData md;
  if (tower) md = tower->mod_snapshot(need_m, need_z);
  std::vector<LevelRef> levels;
  for (const auto& [zflag, idx] : axset) {
    levels.push_back({zflag == 1, idx});
  }
  std::stable_sort(levels.begin(), levels.end(),
                   [](LevelRef a, LevelRef b) {
                     if (a.is_z != b.is_z) return !a.is_z;
                     return a.index < b.index;
                   });
  const ModAxes ax = build_mod_axes(levels, md);
  auto eval_all = [&](const Poly<TowerElem>& p) -> std::optional<std::vector<ModVec>> {
    std::vector<ModVec> out;
    for (const TowerElem& c : p.coeffs()) {
      auto v = meval(c, ax, md);
      if (!v) return std::nullopt;
      out.push_back(std::move(*v));
    }
    return out;
  };
  auto pa = eval_all(A);
  auto pb = eval_all(B);
  if (!pa || !pb) return std::nullopt;
  // Leading coefficients must stay invertible or degrees are not preserved
  // and the certificate argument collapses.
  auto make_monic = [&](std::vector<ModVec>& p) {
    auto li = tensor_inv(p.back(), ax);
    if (!li) return false;
    for (ModVec& c : p) c = tensor_mul(c, *li, ax);
    return true;
  };
  if (!make_monic(*pa) || !make_monic(*pb)) return std::nullopt;
  std::vector<ModVec> r0 = std::move(*pa), r1 = std::move(*pb);
  if (r0.size() < r1.size()) std::swap(r0, r1);
  while (true) {
    // r1 is monic here.  Reduce r0 by r1 in place.
    while (r0.size() >= r1.size()) {
      const ModVec lead = r0.back();
      const size_t shift = r0.size() - r1.size();
      if (!tensor_is_zero(lead)) {
        for (size_t j = 0; j + 1 < r1.size(); ++j) {
          ModVec t = tensor_mul(lead, r1[j], ax);
          ModVec& slot = r0[shift + j];
          for (size_t i = 0; i < ax.n; ++i) slot[i] = mod_sub(slot[i], t[i]);
        }
      }
      r0.pop_back();
      while (!r0.empty() && tensor_is_zero(r0.back())) r0.pop_back();
    }
    if (r0.empty()) return static_cast<int>(r1.size()) - 1;
    if (r0.size() == 1) {
      // Constant terminal: certify only if it is a unit.
      if (!tensor_inv(r0[0], ax)) return std::nullopt;
      return 0;
    }
    auto li = tensor_inv(r0.back(), ax);
    if (!li) return std::nullopt;
    for (ModVec& c : r0) c = tensor_mul(c, *li, ax);
    std::swap(r0, r1);
  }
}

/// gcd (up to a unit) of den-free polynomials by the subresultant remainder
/// sequence over the den-free subring.  Pseudo-remainders stay den-free;
/// the predicted factor beta = g * h^delta is removed by one guarded
/// inverse-multiply per step, keeping growth polynomial where the fraction
/// -field Euclidean ladder is exponential.  Every division is checked, so
/// correctness never rests on the divisibility theory.
inline Poly<TowerElem> subres_gcd_denfree(Poly<TowerElem> a, Poly<TowerElem> b) {
  if (a.degree() < b.degree()) std::swap(a, b);
  TowerElem g(1), h(1);
  bool track = true;
  while (!b.is_zero() && b.degree() > 0) {
    const int delta = a.degree() - b.degree();
    auto [q, r] = pseudo_divmod(a, b);
    (void)q;
    if (track && !r.is_zero()) {
      const TowerElem beta = g * elem_pow(h, delta);
      if (!beta.is_one()) {
        const TowerElem beta_inv = beta.inv();
        std::vector<TowerElem> scaled(static_cast<size_t>(r.degree()) + 1);
        bool ok = true;
        for (int j = 0; j <= r.degree(); ++j) {
          scaled[static_cast<size_t>(j)] = r.coeff(j) * beta_inv;
          if (!elem_den_free(scaled[static_cast<size_t>(j)])) {
            ok = false;
            break;
          }
        }
        if (ok) {
          r = Poly<TowerElem>(std::move(scaled));
        } else {
          track = false;
        }
      }
    }
    if (track) {
      g = b.leading();
      if (delta >= 1) {
        TowerElem hn = elem_pow(g, delta);
        if (delta >= 2) {
          const TowerElem cand = hn * elem_pow(h, delta - 1).inv();
          if (elem_den_free(cand)) {
            hn = cand;
          } else {
            track = false;
          }
        }
        h = std::move(hn);
      }
    }
    a = std::move(b);
    b = std::move(r);
  }
  if (b.is_zero()) return a;
  return Poly<TowerElem>(TowerElem(1));  // constant remainder: coprime inputs
}

}  // namespace detail

inline Poly<TowerElem> poly_gcd(const Poly<TowerElem>& a,
                                const Poly<TowerElem>& b) {
  if (a.is_zero()) return b.is_zero() ? b : b.monic();
  if (b.is_zero()) return a.monic();
  if (a.degree() == 0 || b.degree() == 0) return Poly<TowerElem>(TowerElem(1));
  // clearing scales each input by a unit of the field; the gcd class is
  // unchanged
  Poly<TowerElem> ca = detail::clear_poly_denfree(a).first;
  Poly<TowerElem> cb = detail::clear_poly_denfree(b).first;
  const std::optional<int> mdeg = detail::modular_gcd_degree(ca, cb);
  if (mdeg && *mdeg == 0) return Poly<TowerElem>(TowerElem(1));
  if (mdeg) {
    // Nontrivial gcd ahead: the monic Euclidean ladder wins here, since its
    // intermediates stay reduced and every inner reduction gets certified
    // coprime in the common case.
    return poly_gcd<TowerElem>(a, b);
  }
  Poly<TowerElem> g = detail::subres_gcd_denfree(std::move(ca), std::move(cb));
  if (g.degree() == 0) return Poly<TowerElem>(TowerElem(1));
  const TowerElem li = g.leading().inv();
  return g * li;
}

struct SupportInfo {
  int m;
  int s;
  long column;
};

inline SupportInfo support_of(const TowerElem& a) {
  Support sup = a.support();
  return {sup.m, sup.s, column_of(sup)};
}

// ---- Tower implementation ----

inline TowerElem Tower::u(int i) const {
  check_vertex(i);
  return TowerElem::from_level(
      shared_from_this(), {false, i + 1},
      {RatFn<TowerElem>::variable(), RatFn<TowerElem>(), RatFn<TowerElem>(),
       RatFn<TowerElem>()});
}

inline TowerElem Tower::v(int i) const {
  check_vertex(i);
  return TowerElem::from_level(
      shared_from_this(), {false, i + 1},
      {RatFn<TowerElem>(), RatFn<TowerElem>(1L), RatFn<TowerElem>(),
       RatFn<TowerElem>()});
}

inline TowerElem Tower::x(int i, int j) const {
  check_vertex(i);
  check_vertex(j);
  return TowerElem::from_level(
      shared_from_this(), {true, pair_index(i, j)},
      {RatFn<TowerElem>::variable(), RatFn<TowerElem>(), RatFn<TowerElem>(),
       RatFn<TowerElem>()});
}

inline TowerElem Tower::y(int i, int j) const {
  check_vertex(i);
  check_vertex(j);
  return TowerElem::from_level(
      shared_from_this(), {true, pair_index(i, j)},
      {RatFn<TowerElem>(), RatFn<TowerElem>(1L), RatFn<TowerElem>(),
       RatFn<TowerElem>()});
}

inline TowerElem Tower::gen(GenKind kind, int i, int j) const {
  switch (kind) {
    case GenKind::U: return u(i);
    case GenKind::V: return v(i);
    case GenKind::X: return x(i, j);
    default: return y(i, j);
  }
}

inline TowerElem Tower::t_param(int i, int j) const {
  TowerElem ui = u(i), uj = u(j);
  return graph_.edge(i, j) ? ui * uj : ui + uj;
}

inline const Poly<RatFn<TowerElem>>& Tower::x_min_poly() const {
  std::lock_guard<std::mutex> lock(memo_mutex_);
  if (!x_mp_) x_mp_ = min_poly_X<TowerElem>();
  return *x_mp_;
}

inline const Poly<RatFn<TowerElem>>& Tower::z_min_poly(int k) const {
  {
    std::lock_guard<std::mutex> lock(memo_mutex_);
    auto it = z_mp_.find(k);
    if (it != z_mp_.end()) return it->second;
  }
  auto [i, j] = pair_vertices(k);
  Poly<RatFn<TowerElem>> mp = min_poly_Y<TowerElem>(t_param(i, j));
  std::lock_guard<std::mutex> lock(memo_mutex_);
  return z_mp_.emplace(k, std::move(mp)).first->second;
}

}  // namespace towerfield
