#pragma once

// Functors between graphs and field presentations.
//
//   F_obj  graph -> column-faithful presentation of its tower
//   G_obj  oracle surface -> finite graph prefix, by dovetailed point search
//   F_mor  graph morphism -> field homomorphism (through recover_hom)
//   G_mor  field homomorphism -> graph morphism (through the point maps)
//
// The decoders touch a presentation only through the OracleSurface
// interface: zero, one, ring operations, domain membership.  The u-v curve
// relation p(a, b) = a^4 + 16ab^3 + 10b^4 + 16b - 4 picks out the vertex
// points; for a vertex pair the two quartic curves q(t, x, y) with
// t = u_i*u_j and t = u_i + u_j decide edge versus non-edge, because
// exactly one of them has a point.
//
// A blind scan of all code pairs in pi order is correct but hopeless for
// sequential presentations, where generator codes run into the thousands.
// The explorer therefore keeps a verified dictionary: each code below the
// scan horizon is guessed by local native decoding, the guess e = P/D is
// cleared of denominators, and mul(c, code(D)) == code(P) is checked
// through the surface alone.  A code verified to be something other than a
// coordinate of the sought point is skipped without evaluation; unverified
// codes are evaluated exactly as the dovetail prescribes.  Skips never
// change the returned point or the edge decision when the surface is
// isomorphic to a native presentation, since the points in question are
// unique and the verified elements cannot equal their coordinates.

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "towerfield/presentation.hpp"

namespace towerfield {

/// Caps for the dovetailed searches.  per_search bounds the candidates
/// actually evaluated through the surface during one search; raw scan steps
/// (mostly dictionary skips) are allowed scan_factor times that.
/// Exhaustion raises BudgetExceeded, never a wrong answer.
struct SearchBudget {
  long per_search = 1000000;
  long scan_factor = 4096;

  void validate() const {
    if (per_search <= 0 || scan_factor <= 0) {
      throw InputFormatError("SearchBudget: caps must be positive");
    }
  }
  long raw_cap() const {
    if (per_search > std::numeric_limits<long>::max() / scan_factor) {
      return std::numeric_limits<long>::max();
    }
    return per_search * scan_factor;
  }
};

/// A point of the u-v curve seen through an oracle surface: a pair of codes
/// with p(decode(a), decode(b)) = 0.  The first coordinate is the u-value.
/// Points are enumerated in increasing pi(a, b) order.
struct XPoint {
  Code a;
  Code b;

  Int order() const { return pi(a, b); }
  friend bool operator==(const XPoint& p, const XPoint& q) {
    return p.a == q.a && p.b == q.b;
  }
  friend bool operator!=(const XPoint& p, const XPoint& q) { return !(p == q); }
};

/// Injective vertex map between graphs: an explicit finite image list, or a
/// named total rule for infinite graphs.
class GraphMorphism {
 public:
  static GraphMorphism identity() {
    GraphMorphism g;
    g.rule_ = Rule::Identity;
    return g;
  }

  /// Named total injections: "identity" or "shift" (i -> i + 1).
  static GraphMorphism named(const std::string& rule) {
    if (rule == "identity") return identity();
    if (rule == "shift") {
      GraphMorphism g;
      g.rule_ = Rule::Shift;
      return g;
    }
    throw InputFormatError("unknown morphism rule: " + rule);
  }

  static GraphMorphism from_images(std::vector<long> images) {
    std::set<long> seen;
    for (long v : images) {
      if (v < 0) throw InputFormatError("morphism image must be a natural number");
      if (!seen.insert(v).second) {
        throw InputFormatError("morphism images must be injective");
      }
    }
    GraphMorphism g;
    g.rule_ = Rule::Finite;
    g.images_ = std::move(images);
    return g;
  }

  /// {"type":"named","rule":...} or {"type":"map","images":[...]}.
  static GraphMorphism from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw InputFormatError("morphism: expected a JSON object");
    const std::string type = j.value("type", "");
    if (type == "named") return named(j.value("rule", ""));
    if (type == "map") {
      if (!j.contains("images") || !j["images"].is_array()) {
        throw InputFormatError("morphism: \"map\" needs an \"images\" array");
      }
      std::vector<long> images;
      for (const auto& v : j["images"]) {
        if (!v.is_number_integer()) {
          throw InputFormatError("morphism: images must be integers");
        }
        images.push_back(v.get<long>());
      }
      return from_images(std::move(images));
    }
    throw InputFormatError("morphism: type must be \"named\" or \"map\"");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    switch (rule_) {
      case Rule::Identity:
        j["type"] = "named";
        j["rule"] = "identity";
        break;
      case Rule::Shift:
        j["type"] = "named";
        j["rule"] = "shift";
        break;
      case Rule::Finite:
        j["type"] = "map";
        j["images"] = images_;
        break;
    }
    return j;
  }

  long apply(long i) const {
    if (i < 0) throw VertexOutOfRange("morphism applied to a negative vertex");
    switch (rule_) {
      case Rule::Identity:
        return i;
      case Rule::Shift:
        return i + 1;
      case Rule::Finite:
        if (i >= static_cast<long>(images_.size())) {
          throw VertexOutOfRange("vertex " + std::to_string(i) +
                                 " outside the morphism domain");
        }
        return images_[static_cast<size_t>(i)];
    }
    throw std::logic_error("morphism: bad rule");
  }

  bool is_finite() const { return rule_ == Rule::Finite; }
  /// Domain size for explicit maps; -1 for total rules.
  long domain_size() const {
    return rule_ == Rule::Finite ? static_cast<long>(images_.size()) : -1;
  }

  std::string description() const {
    switch (rule_) {
      case Rule::Identity:
        return "identity";
      case Rule::Shift:
        return "shift";
      case Rule::Finite: {
        std::ostringstream os;
        os << "map[";
        for (size_t k = 0; k < images_.size(); ++k) {
          if (k) os << ' ';
          os << images_[k];
        }
        os << ']';
        return os.str();
      }
    }
    return "?";
  }

  friend bool operator==(const GraphMorphism& a, const GraphMorphism& b) {
    return a.rule_ == b.rule_ && a.images_ == b.images_;
  }

 private:
  enum class Rule { Identity, Shift, Finite };
  GraphMorphism() = default;
  Rule rule_ = Rule::Identity;
  std::vector<long> images_;
};

/// Composition g after h.
inline GraphMorphism compose(const GraphMorphism& g, const GraphMorphism& h) {
  if (h.is_finite()) {
    std::vector<long> images;
    for (long i = 0; i < h.domain_size(); ++i) images.push_back(g.apply(h.apply(i)));
    return GraphMorphism::from_images(std::move(images));
  }
  if (g == GraphMorphism::identity()) return h;
  if (h == GraphMorphism::identity()) return g;
  throw InputFormatError("cannot compose these named rules into one morphism");
}

/// Edge preservation and reflection on vertices 0..n-1.
inline bool morphism_preserves_edges(const GraphOracle& src, const GraphOracle& dst,
                                     const GraphMorphism& g, long n) {
  for (long i = 1; i < n; ++i) {
    for (long j = 0; j < i; ++j) {
      if (src.edge(static_cast<int>(i), static_cast<int>(j)) !=
          dst.edge(static_cast<int>(g.apply(i)), static_cast<int>(g.apply(j)))) {
        return false;
      }
    }
  }
  return true;
}

namespace fdetail {

/// Per-call accounting against a SearchBudget.
struct BudgetMeter {
  const SearchBudget& budget;
  const char* what;
  long raws = 0;
  long evals = 0;

  void raw() {
    if (++raws > budget.raw_cap()) {
      throw BudgetExceeded(std::string(what) + ": raw scan cap exhausted");
    }
  }
  void eval() {
    if (++evals > budget.per_search) {
      throw BudgetExceeded(std::string(what) + ": candidate budget exhausted");
    }
  }
};

/// Shared search state for one oracle surface: the memoized point scan, the
/// per-pair curve decisions, and the verified code dictionary.  All public
/// methods are serialized by one mutex; the surface is only touched through
/// its abstract interface.
class SurfaceExplorer {
 public:
  SurfaceExplorer(std::shared_ptr<const OracleSurface> f, long vertex_hint)
      : f_(std::move(f)) {
    zero_ = f_->zero();
    one_ = f_->one();
    int_code_[Int(0)] = zero_;
    int_code_[Int(1)] = one_;
    rebuild_model(std::max(vertex_hint, 1L));
  }

  std::shared_ptr<const OracleSurface> surface() const { return f_; }

  void require_vertices(long n) {
    std::lock_guard<std::mutex> lk(mu_);
    if (n > nverts_) {
      rebuild_model(n);
      reclassify_unknowns();
    }
  }

  /// The i-th curve point in increasing pi order (shared scan; later calls
  /// resume where earlier ones stopped).
  XPoint xpoint(long i, const SearchBudget& budget) {
    budget.validate();
    std::lock_guard<std::mutex> lk(mu_);
    if (i < 0) throw InputFormatError("point index must be a natural number");
    if (i + 1 > nverts_) {
      rebuild_model(i + 1);
      reclassify_unknowns();
    }
    BudgetMeter meter{budget, "point search"};
    advance_xscan(i + 1, meter);
    return xpoints_[static_cast<size_t>(i)];
  }

  /// Edge decision for vertex pair index s (pairs numbered from 1 in the
  /// tower order).  Memoized; a decision also unlocks that level for the
  /// dictionary.
  bool pair_edge(int s, const SearchBudget& budget) {
    budget.validate();
    std::lock_guard<std::mutex> lk(mu_);
    BudgetMeter meter{budget, "pair search"};
    return pair_edge_impl(s, meter);
  }

  /// Position of a given point in the scan order.  Validates the curve
  /// relation first; a pair that fails it is not a point at all.
  long xpoint_index_of(const XPoint& p, const SearchBudget& budget) {
    budget.validate();
    std::lock_guard<std::mutex> lk(mu_);
    if (!f_->in_domain(p.a) || !f_->in_domain(p.b) ||
        p_value_generic(p.a, p.b) != zero_) {
      throw NotAPoint("the image pair does not satisfy the curve relation");
    }
    BudgetMeter meter{budget, "point index search"};
    Int target = pi(p.a, p.b);
    for (;;) {
      for (size_t k = 0; k < xpoints_.size(); ++k) {
        if (xpoints_[k] == p) return static_cast<long>(k);
      }
      if (Int(xfrontier_) > target) {
        throw NotAPoint("the pair never appears in the point enumeration");
      }
      advance_xscan(static_cast<long>(xpoints_.size()) + 1, meter);
    }
  }

  /// Verified identity of a code, if the dictionary knows it.
  std::optional<TowerElem> identify(const Code& c) {
    std::lock_guard<std::mutex> lk(mu_);
    if (c < 0) return std::nullopt;
    if (c.fits_slong_p()) {
      long cl = c.get_si();
      if (cl < horizon_) {
        auto it = known_elems_.find(cl);
        if (it != known_elems_.end()) return it->second;
        return std::nullopt;
      }
    }
    // outside the swept range: one-off guess and verify
    return classify_code(c, nullptr);
  }

  /// Slow identification: enumerate elements of the decoded structure in
  /// serial-length order and test each against the code through the
  /// surface.  Total whenever the code really denotes an element over the
  /// generators discovered so far.
  TowerElem identify_by_enumeration(const Code& c, const SearchBudget& budget) {
    budget.validate();
    std::lock_guard<std::mutex> lk(mu_);
    BudgetMeter meter{budget, "expression search"};
    for (long len = 1;; ++len) {
      meter.raw();
      for (long col : guessable_columns()) {
        Int cnt = censuses_[0]->payload_count(col, len);
        Int base = payload_base(col, len);
        for (Int r = 0; r < cnt; ++r) {
          meter.eval();
          BitVec bits = censuses_[0]->payload_unrank(col, Int(base + r));
          TowerElem e = parse_payload(bits, col);
          if (verify_code(c, e)) return e;
        }
      }
    }
  }

  /// Surface code of an element of the local model (all generators in its
  /// support must have been discovered).  Division is realized by an
  /// inverse search when the denominator is not 1.
  Code element_code(const TowerElem& e, const SearchBudget& budget) {
    budget.validate();
    std::lock_guard<std::mutex> lk(mu_);
    auto [pe, de] = detail::flatten_fraction(e);
    Int scale = den_lcm(pe);
    scale = lcm(scale, den_lcm(de));
    if (scale != 1) {
      TowerElem se{Rat(scale, Int(1))};
      pe = pe * se;
      de = de * se;
    }
    std::optional<Code> cp = int_elem_code(pe);
    std::optional<Code> cd = int_elem_code(de);
    if (!cp || !cd) {
      throw InputFormatError("element involves generators with no known code");
    }
    if (*cd == one_) return *cp;
    Code inv = inv_by_search(*f_, *cd, budget.per_search);
    return f_->mul(*cp, inv);
  }

  /// The graph decided so far, as a finite oracle on the model vertices.
  GraphOracle decided_graph(long n) const {
    std::lock_guard<std::mutex> lk(mu_);
    std::set<std::pair<int, int>> edges;
    for (const auto& [s, kind] : pair_kind_) {
      if (kind > 0) {
        auto [i, j] = Tower::pair_vertices(s);
        if (i < n) edges.insert({i, j});
      }
    }
    return GraphOracle::finite(static_cast<int>(n), edges);
  }

  std::shared_ptr<const Tower> model() const {
    std::lock_guard<std::mutex> lk(mu_);
    return model_;
  }

 private:
  enum : uint8_t { kUnknown = 0, kOther, kU, kV, kX, kY };
  struct Cls {
    uint8_t kind = kUnknown;
    bool dom = false;
  };

  // ---- model maintenance ----

  void rebuild_model(long nverts) {
    nverts_ = nverts;
    model_ = Tower::create(GraphOracle::finite(static_cast<int>(nverts_), edges_));
    censuses_ = {GrammarCensus::for_bound(nverts_), GrammarCensus::for_bound(-1)};
  }

  std::vector<long> guessable_columns() const {
    std::vector<long> cols{0};
    for (int i = 0; ucode_.count(i) != 0; ++i) cols.push_back(2 * (i + 1));
    for (const auto& [s, kind] : pair_kind_) {
      (void)kind;
      cols.push_back(2L * s - 1);
    }
    return cols;
  }

  Int payload_base(long col, long len) const {
    Int base = 0;
    for (long l = 1; l < len; ++l) base += censuses_[0]->payload_count(col, l);
    return base;
  }

  TowerElem parse_payload(const BitVec& bits, long col) const {
    BitReader rd(bits);
    TowerElem e = parse_element(rd, model_, col);
    if (!rd.done()) throw InputFormatError("trailing bits in payload");
    return e;
  }

  // ---- dictionary ----

  void ensure_horizon(long h) {
    if (h <= horizon_) return;
    cls_.resize(static_cast<size_t>(h));
    for (long c = horizon_; c < h; ++c) {
      Cls& cl = cls_[static_cast<size_t>(c)];
      Int ci(c);
      cl.dom = f_->in_domain(ci);
      if (!cl.dom) {
        cl.kind = kOther;  // not a field element; never a coordinate
        continue;
      }
      if (!classify_code(ci, &cl)) unknowns_.push_back(c);
    }
    horizon_ = h;
  }

  /// Guess the element behind a code by native decoding under each census
  /// and mode, then verify the guess through the surface.  On success the
  /// classification (and, for swept codes, the dictionary entry) is filled.
  std::optional<TowerElem> classify_code(const Int& c, Cls* cl) {
    for (int k = 0; k < 4; ++k) {
      int strat = (guess_pref_ + k) % 4;
      std::optional<std::pair<long, TowerElem>> guess = guess_elem(c, strat);
      if (!guess) continue;
      if (!verify_code(c, guess->second)) continue;
      guess_pref_ = strat;
      if (cl != nullptr) record(c, guess->first, guess->second, cl);
      return guess->second;
    }
    return std::nullopt;
  }

  std::optional<std::pair<long, TowerElem>> guess_elem(const Int& c, int strat) {
    const auto& census = censuses_[static_cast<size_t>(strat / 2)];
    const bool sequential = (strat % 2) != 0;
    try {
      long col;
      BitVec bits;
      if (sequential) {
        auto [gc, gb] = census->seq_unrank(c);
        col = gc;
        bits = std::move(gb);
      } else {
        auto [ci, ri] = pi_inv(c);
        if (!ci.fits_slong_p()) return std::nullopt;
        col = ci.get_si();
        if (!census->column_realized(col)) return std::nullopt;
        bits = census->payload_unrank(col, ri);
      }
      if (col > 0) {
        if (col % 2 == 0) {
          if (col / 2 > nverts_) return std::nullopt;
        } else if (pair_kind_.count(static_cast<int>((col + 1) / 2)) == 0) {
          return std::nullopt;  // undecided level: cannot model it yet
        }
      }
      return std::make_pair(col, parse_payload(bits, col));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  /// Check c = e through the surface: with e = P/D cleared to integer
  /// coefficients, c is e exactly when mul(c, code(D)) == code(P).
  bool verify_code(const Int& c, const TowerElem& e) {
    try {
      auto [pe, de] = detail::flatten_fraction(e);
      Int scale = den_lcm(pe);
      scale = lcm(scale, den_lcm(de));
      if (scale != 1) {
        TowerElem se{Rat(scale, Int(1))};
        pe = pe * se;
        de = de * se;
      }
      std::optional<Code> cp = int_elem_code(pe);
      if (!cp) return false;
      std::optional<Code> cd = int_elem_code(de);
      if (!cd) return false;
      return f_->mul(c, *cd) == *cp;
    } catch (const std::exception&) {
      return false;
    }
  }

  void record(const Int& c, long col, const TowerElem& e, Cls* cl) {
    cl->kind = kOther;
    if (col > 0 && col % 2 == 0) {
      int i = static_cast<int>(col / 2) - 1;
      if (e == model_->u(i)) cl->kind = kU;
      else if (e == model_->v(i)) cl->kind = kV;
    } else if (col > 0) {
      auto [i, j] = Tower::pair_vertices(static_cast<int>((col + 1) / 2));
      if (e == model_->x(i, j)) cl->kind = kX;
      else if (e == model_->y(i, j)) cl->kind = kY;
    }
    if (c.fits_slong_p()) known_elems_[c.get_si()] = e;
  }

  void reclassify_unknowns() {
    std::vector<long> again;
    again.swap(unknowns_);
    for (long c : again) {
      Cls& cl = cls_[static_cast<size_t>(c)];
      if (!classify_code(Int(c), &cl)) unknowns_.push_back(c);
    }
  }

  static Int lcm(const Int& a, const Int& b) {
    Int r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
  }

  static Int den_lcm(const TowerElem& e) {
    if (e.is_rational()) return e.rational_value().denominator();
    Int out = 1;
    for (const auto& rf : e.ext()) {
      if (rf.is_zero()) continue;
      for (const auto& poly : {rf.num(), rf.den()}) {
        for (int d = 0; d <= poly.degree(); ++d) {
          out = lcm(out, den_lcm(poly.coeff(d)));
        }
      }
    }
    return out;
  }

  // ---- codes of model elements (den-free, integer coefficients) ----

  Code int_code(const Int& n) {
    if (n < 0) {
      return f_->sub(zero_, int_code(-n));
    }
    auto it = int_code_.find(n);
    if (it != int_code_.end()) return it->second;
    Int h = n / 2;
    Code ch = int_code(h);
    Code c = f_->add(ch, ch);
    if (n % 2 != 0) c = f_->add(c, one_);
    int_code_.emplace(n, c);
    return c;
  }

  std::optional<Code> poly_code(const RatFn<TowerElem>& rf, const Code& g) {
    if (rf.is_zero()) return zero_;
    if (!rf.den().is_one()) return std::nullopt;
    const auto& p = rf.num();
    std::optional<Code> acc = int_elem_code(p.coeff(p.degree()));
    if (!acc) return std::nullopt;
    for (int d = p.degree() - 1; d >= 0; --d) {
      std::optional<Code> cd = int_elem_code(p.coeff(d));
      if (!cd) return std::nullopt;
      acc = f_->add(f_->mul(*acc, g), *cd);
    }
    return acc;
  }

  std::optional<Code> int_elem_code(const TowerElem& e) {
    if (e.is_rational()) {
      const Rat& r = e.rational_value();
      if (r.denominator() != 1) return std::nullopt;
      return int_code(r.numerator());
    }
    auto key = std::make_pair(column_of(e.support()), serialize_element(e));
    auto it = elem_code_memo_.find(key);
    if (it != elem_code_memo_.end()) return it->second;
    LevelRef top = e.top_level();
    Code g, w;
    if (!top.is_z) {
      auto gu = ucode_.find(top.index - 1);
      auto gv = vcode_.find(top.index - 1);
      if (gu == ucode_.end() || gv == vcode_.end()) return std::nullopt;
      g = gu->second;
      w = gv->second;
    } else {
      auto gx = xcode_.find(top.index);
      auto gy = ycode_.find(top.index);
      if (gx == xcode_.end() || gy == ycode_.end()) return std::nullopt;
      g = gx->second;
      w = gy->second;
    }
    const auto& co = e.ext();
    std::optional<Code> acc = poly_code(co[3], g);
    if (!acc) return std::nullopt;
    for (int k = 2; k >= 0; --k) {
      std::optional<Code> pk = poly_code(co[static_cast<size_t>(k)], g);
      if (!pk) return std::nullopt;
      acc = f_->add(f_->mul(*acc, w), *pk);
    }
    elem_code_memo_.emplace(std::move(key), *acc);
    return acc;
  }

  // ---- curve evaluation through the surface ----

  void ensure_consts() {
    if (consts_ready_) return;
    c4_ = int_code(Int(4));
    c10_ = int_code(Int(10));
    c16_ = int_code(Int(16));
    cm4_ = f_->sub(zero_, c4_);
    consts_ready_ = true;
  }

  /// p(a, b) with per-coordinate term caches; a and b are swept codes.
  Code p_value(long a, long b) {
    ensure_consts();
    auto ia = pa_.find(a);
    if (ia == pa_.end()) {
      Code ca(a);
      Code sq = f_->mul(ca, ca);
      ia = pa_.emplace(a, std::array<Code, 2>{f_->mul(sq, sq), f_->mul(c16_, ca)}).first;
    }
    auto ib = pb_.find(b);
    if (ib == pb_.end()) {
      Code cb(b);
      Code sq = f_->mul(cb, cb);
      Code b3 = f_->mul(sq, cb);
      Code b4 = f_->mul(b3, cb);
      Code tail = f_->add(f_->add(f_->mul(c10_, b4), f_->mul(c16_, cb)), cm4_);
      ib = pb_.emplace(b, std::array<Code, 2>{b3, tail}).first;
    }
    const auto& [a4, a16] = ia->second;
    const auto& [b3, tail] = ib->second;
    return f_->add(f_->add(a4, f_->mul(a16, b3)), tail);
  }

  Code p_value_generic(const Code& a, const Code& b) {
    ensure_consts();
    Code a2 = f_->mul(a, a);
    Code a4 = f_->mul(a2, a2);
    Code b2 = f_->mul(b, b);
    Code b3 = f_->mul(b2, b);
    Code b4 = f_->mul(b3, b);
    Code r = f_->add(a4, f_->mul(f_->mul(c16_, a), b3));
    r = f_->add(r, f_->mul(c10_, b4));
    r = f_->add(r, f_->mul(c16_, b));
    return f_->sub(r, c4_);
  }

  struct QTerms {
    Code b3;    // b^3
    Code b4p1;  // b^4 + 1
    Code bp1;   // b + 1
  };

  /// Both curve values at (a, b): q(t, a, b) = (a^4 + b^4 + 1) + t(a^4 + a b^3 + b + 1).
  std::pair<Code, Code> q_values(long a, long b, const Code& tE, const Code& tN) {
    ensure_consts();
    auto ia = pa_.find(a);
    if (ia == pa_.end()) {
      Code ca(a);
      Code sq = f_->mul(ca, ca);
      ia = pa_.emplace(a, std::array<Code, 2>{f_->mul(sq, sq), f_->mul(c16_, ca)}).first;
    }
    auto ib = qb_.find(b);
    if (ib == qb_.end()) {
      Code cb(b);
      Code sq = f_->mul(cb, cb);
      Code b3 = f_->mul(sq, cb);
      Code b4 = f_->mul(b3, cb);
      ib = qb_.emplace(b, QTerms{b3, f_->add(b4, one_), f_->add(cb, one_)}).first;
    }
    const Code& a4 = ia->second[0];
    const QTerms& qt = ib->second;
    Code ab3 = f_->mul(Code(a), qt.b3);
    Code acurve = f_->add(a4, qt.b4p1);
    Code bcurve = f_->add(f_->add(a4, ab3), qt.bp1);
    return {f_->add(acurve, f_->mul(tE, bcurve)), f_->add(acurve, f_->mul(tN, bcurve))};
  }

  // ---- the scans ----

  void found_xpoint(long a, long b) {
    int i = static_cast<int>(xpoints_.size());
    xpoints_.push_back(XPoint{Int(a), Int(b)});
    ucode_[i] = Int(a);
    vcode_[i] = Int(b);
    cls_[static_cast<size_t>(a)].kind = kU;
    cls_[static_cast<size_t>(b)].kind = kV;
    known_elems_[a] = model_->u(i);
    known_elems_[b] = model_->v(i);
    reclassify_unknowns();
  }

  void advance_xscan(long need, BudgetMeter& meter) {
    long m = xfrontier_;
    long s = 0;
    while ((s + 1) * (s + 2) / 2 <= m) ++s;
    long b = m - s * (s + 1) / 2;
    while (static_cast<long>(xpoints_.size()) < need) {
      long a = s - b;
      ensure_horizon(s + 1);
      meter.raw();
      const Cls& ca = cls_[static_cast<size_t>(a)];
      const Cls& cb = cls_[static_cast<size_t>(b)];
      if (ca.dom && cb.dom && (ca.kind == kUnknown || ca.kind == kU) &&
          (cb.kind == kUnknown || cb.kind == kV)) {
        meter.eval();
        try {
          if (p_value(a, b) == zero_) found_xpoint(a, b);
        } catch (const CodeOutOfDomain&) {
          // a partial surface cannot certify this pair; move on
        }
      }
      ++m;
      if (++b > s) {
        ++s;
        b = 0;
      }
      xfrontier_ = m;
    }
  }

  bool pair_edge_impl(int s, BudgetMeter& meter) {
    if (auto it = pair_kind_.find(s); it != pair_kind_.end()) return it->second > 0;
    auto [vi, vj] = Tower::pair_vertices(s);
    if (vi + 1 > nverts_) {
      rebuild_model(vi + 1);
      reclassify_unknowns();
    }
    advance_xscan(vi + 1, meter);
    Code tE = f_->mul(ucode_[vi], ucode_[vj]);
    Code tN = f_->add(ucode_[vi], ucode_[vj]);
    long m = yfrontier_[s];
    long sd = 0;
    while ((sd + 1) * (sd + 2) / 2 <= m) ++sd;
    long b = m - sd * (sd + 1) / 2;
    for (;;) {
      long a = sd - b;
      ensure_horizon(sd + 1);
      meter.raw();
      const Cls& ca = cls_[static_cast<size_t>(a)];
      const Cls& cb = cls_[static_cast<size_t>(b)];
      if (ca.dom && cb.dom && ca.kind == kUnknown && cb.kind == kUnknown) {
        bool hit = false;
        bool is_edge = false;
        try {
          meter.eval();
          auto [qe, qn] = q_values(a, b, tE, tN);
          meter.eval();
          if (qe == zero_) {
            hit = true;
            is_edge = true;
          } else if (qn == zero_) {
            hit = true;
          }
        } catch (const CodeOutOfDomain&) {
          // partial surface; move on
        }
        if (hit) {
          ++m;
          yfrontier_[s] = m;
          decide_pair(s, is_edge, a, b);
          return is_edge;
        }
      }
      ++m;
      if (++b > sd) {
        ++sd;
        b = 0;
      }
      yfrontier_[s] = m;
    }
  }

  void decide_pair(int s, bool is_edge, long a, long b) {
    pair_kind_[s] = is_edge ? 1 : -1;
    if (is_edge) edges_.insert(Tower::pair_vertices(s));
    rebuild_model(nverts_);
    xcode_[s] = Int(a);
    ycode_[s] = Int(b);
    cls_[static_cast<size_t>(a)].kind = kX;
    cls_[static_cast<size_t>(b)].kind = kY;
    auto [vi, vj] = Tower::pair_vertices(s);
    known_elems_[a] = model_->x(vi, vj);
    known_elems_[b] = model_->y(vi, vj);
    reclassify_unknowns();
  }

  std::shared_ptr<const OracleSurface> f_;
  mutable std::mutex mu_;

  long nverts_ = 0;
  std::set<std::pair<int, int>> edges_;
  std::map<int, int> pair_kind_;  // s -> +1 edge, -1 non-edge
  std::shared_ptr<const Tower> model_;
  std::array<std::shared_ptr<GrammarCensus>, 2> censuses_;
  int guess_pref_ = 0;

  Code zero_, one_;
  std::map<Int, Code> int_code_;
  std::map<int, Code> ucode_, vcode_, xcode_, ycode_;
  std::vector<XPoint> xpoints_;
  long xfrontier_ = 0;
  std::map<int, long> yfrontier_;

  std::vector<Cls> cls_;
  long horizon_ = 0;
  std::vector<long> unknowns_;
  std::map<long, TowerElem> known_elems_;
  std::map<std::pair<long, BitVec>, Code> elem_code_memo_;

  bool consts_ready_ = false;
  Code c4_, c10_, c16_, cm4_;
  std::unordered_map<long, std::array<Code, 2>> pa_;  // a^4, 16a
  std::unordered_map<long, std::array<Code, 2>> pb_;  // b^3, 10b^4 + 16b - 4
  std::unordered_map<long, QTerms> qb_;
};

/// One explorer per live surface, so repeated decoding calls share their
/// scan state.  The registry owns the explorers; an entry is replaced when
/// its surface pointer is reused by a new object.
inline std::shared_ptr<SurfaceExplorer> explorer_for(
    const std::shared_ptr<const OracleSurface>& f, long vertex_hint) {
  struct Entry {
    std::weak_ptr<const OracleSurface> surf;
    std::shared_ptr<SurfaceExplorer> ex;
  };
  static std::mutex mu;
  static std::map<const OracleSurface*, Entry> reg;
  std::lock_guard<std::mutex> lk(mu);
  auto it = reg.find(f.get());
  if (it != reg.end()) {
    if (it->second.surf.lock() == f) {
      it->second.ex->require_vertices(vertex_hint);
      return it->second.ex;
    }
    reg.erase(it);
  }
  auto ex = std::make_shared<SurfaceExplorer>(f, vertex_hint);
  reg[f.get()] = Entry{f, ex};
  return ex;
}

}  // namespace fdetail

/// The column-faithful presentation of a graph's tower; deterministic in
/// the graph.
inline std::shared_ptr<FieldPresentation> F_obj(const GraphOracle& graph) {
  return FieldPresentation::make(Tower::create(graph), PresentationMode::ColumnFaithful);
}

/// The i-th curve point of a presentation, found through the oracle surface
/// alone.
inline XPoint delta(const std::shared_ptr<const OracleSurface>& f, long i,
                    const SearchBudget& budget = {}) {
  return fdetail::explorer_for(f, i + 1)->xpoint(i, budget);
}

/// The point map of a native presentation; equal to delta on it.
inline XPoint epsilon(const GraphOracle& graph, long i, const SearchBudget& budget = {}) {
  return delta(F_obj(graph), i, budget);
}

/// Decode the graph on vertices 0..n-1 from an oracle surface: vertex i is
/// the i-th curve point, and each vertex pair is decided by dovetailing the
/// two quartic curve searches until exactly one of them produces a point.
inline GraphOracle G_obj(const std::shared_ptr<const OracleSurface>& f, long n,
                         const SearchBudget& budget = {}) {
  if (n < 0) throw InputFormatError("vertex count must be a natural number");
  auto ex = fdetail::explorer_for(f, std::max(n, 1L));
  for (long i = 0; i < n; ++i) ex->xpoint(i, budget);
  std::set<std::pair<int, int>> edges;
  int pairs = static_cast<int>(n * (n - 1) / 2);
  for (int s = 1; s <= pairs; ++s) {
    if (ex->pair_edge(s, budget)) edges.insert(Tower::pair_vertices(s));
  }
  return GraphOracle::finite(static_cast<int>(n), edges);
}

/// A homomorphism between two presentations, as a code-to-code map.
class FieldHomOracle {
 public:
  virtual ~FieldHomOracle() = default;
  virtual Code apply(const Code& c) const = 0;
  virtual std::shared_ptr<const OracleSurface> source() const = 0;
  virtual std::shared_ptr<const OracleSurface> target() const = 0;
  virtual std::string description() const = 0;
};

namespace fdetail {

/// Rebuild an element over the target tower with every generator index
/// pushed through the vertex map.  The pair kind must be preserved, or the
/// mapped algebraic relations would be wrong.
inline TowerElem map_element(const TowerElem& e, const GraphMorphism& g,
                             const GraphOracle& src_graph,
                             const std::shared_ptr<const Tower>& dst_tower) {
  if (e.is_rational()) return e;
  LevelRef top = e.top_level();
  TowerElem gt, wt;
  if (!top.is_z) {
    int i = top.index - 1;
    long gi = g.apply(i);
    gt = dst_tower->u(static_cast<int>(gi));
    wt = dst_tower->v(static_cast<int>(gi));
  } else {
    auto [i, j] = Tower::pair_vertices(top.index);
    long gi = g.apply(i);
    long gj = g.apply(j);
    if (src_graph.edge(i, j) !=
        dst_tower->graph().edge(static_cast<int>(gi), static_cast<int>(gj))) {
      throw NotAPoint("vertex map does not preserve the pair kind");
    }
    int hi = static_cast<int>(std::max(gi, gj));
    int lo = static_cast<int>(std::min(gi, gj));
    gt = dst_tower->x(hi, lo);
    wt = dst_tower->y(hi, lo);
  }
  auto eval_poly = [&](const Poly<TowerElem>& p) {
    TowerElem acc = map_element(p.coeff(p.degree()), g, src_graph, dst_tower);
    for (int d = p.degree() - 1; d >= 0; --d) {
      acc = acc * gt + map_element(p.coeff(d), g, src_graph, dst_tower);
    }
    return acc;
  };
  const auto& co = e.ext();
  TowerElem acc;
  for (int k = 3; k >= 0; --k) {
    acc = acc * wt;
    const auto& rf = co[static_cast<size_t>(k)];
    if (rf.is_zero()) continue;
    TowerElem num = eval_poly(rf.num());
    if (rf.den().is_one()) {
      acc = acc + num;
    } else {
      acc = acc + num / eval_poly(rf.den());
    }
  }
  return acc;
}

/// Collect the tower levels appearing anywhere in an element.
inline void collect_levels(const TowerElem& e, std::set<std::pair<bool, int>>& out) {
  if (e.is_rational()) return;
  LevelRef top = e.top_level();
  out.insert({top.is_z, top.index});
  for (const auto& rf : e.ext()) {
    if (rf.is_zero()) continue;
    for (const auto& poly : {rf.num(), rf.den()}) {
      for (int d = 0; d <= poly.degree(); ++d) collect_levels(poly.coeff(d), out);
    }
  }
}

class RecoveredHom : public FieldHomOracle {
 public:
  RecoveredHom(std::shared_ptr<const OracleSurface> src,
               std::shared_ptr<const OracleSurface> dst, GraphMorphism g,
               SearchBudget budget)
      : src_(std::move(src)),
        dst_(std::move(dst)),
        g_(std::move(g)),
        budget_(budget),
        src_native_(std::dynamic_pointer_cast<const FieldPresentation>(src_)),
        dst_native_(std::dynamic_pointer_cast<const FieldPresentation>(dst_)) {
    budget_.validate();
  }

  Code apply(const Code& c) const override {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = cache_.find(c);
      if (it != cache_.end()) return it->second;
    }
    TowerElem e = source_element(c);
    Code out = target_code(e);
    std::lock_guard<std::mutex> lk(mu_);
    cache_.emplace(c, out);
    return out;
  }

  std::shared_ptr<const OracleSurface> source() const override { return src_; }
  std::shared_ptr<const OracleSurface> target() const override { return dst_; }
  std::string description() const override {
    return "recovered homomorphism along " + g_.description();
  }

 private:
  TowerElem source_element(const Code& c) const {
    if (src_native_) return src_native_->decode(c);
    auto ex = explorer_for(src_, 1);
    if (auto known = ex->identify(c)) return *known;
    return ex->identify_by_enumeration(c, budget_);
  }

  Code target_code(const TowerElem& e) const {
    std::set<std::pair<bool, int>> levels;
    collect_levels(e, levels);
    GraphOracle src_graph =
        src_native_ ? src_native_->tower()->graph() : explorer_for(src_, 1)->decided_graph(needed_vertices(levels));
    if (dst_native_) {
      TowerElem img = map_element(e, g_, src_graph, dst_native_->tower());
      return dst_native_->encode(img);
    }
    auto dex = explorer_for(dst_, 1);
    // the image generators must be discovered before their codes exist
    for (const auto& [isz, idx] : levels) {
      if (!isz) {
        dex->xpoint(g_.apply(idx - 1), budget_);
      } else {
        auto [i, j] = Tower::pair_vertices(idx);
        long gi = g_.apply(i);
        long gj = g_.apply(j);
        int hi = static_cast<int>(std::max(gi, gj));
        int lo = static_cast<int>(std::min(gi, gj));
        dex->xpoint(hi, budget_);
        dex->pair_edge(Tower::pair_index(hi, lo), budget_);
      }
    }
    TowerElem img = map_element(e, g_, src_graph, dex->model());
    return dex->element_code(img, budget_);
  }

  long needed_vertices(const std::set<std::pair<bool, int>>& levels) const {
    long n = 1;
    for (const auto& [isz, idx] : levels) {
      if (!isz) {
        n = std::max(n, static_cast<long>(idx));
      } else {
        n = std::max(n, static_cast<long>(Tower::pair_vertices(idx).first) + 1);
      }
    }
    return n;
  }

  std::shared_ptr<const OracleSurface> src_;
  std::shared_ptr<const OracleSurface> dst_;
  GraphMorphism g_;
  SearchBudget budget_;
  std::shared_ptr<const FieldPresentation> src_native_;
  std::shared_ptr<const FieldPresentation> dst_native_;
  mutable std::mutex mu_;
  mutable std::map<Code, Code> cache_;
};

}  // namespace fdetail

/// The homomorphism whose graph image is the given morphism: generator
/// images follow the point maps, and an arbitrary code is handled by
/// expressing its element over the generators and pushing the expression
/// through the vertex map.
inline std::shared_ptr<FieldHomOracle> recover_hom(
    const std::shared_ptr<const OracleSurface>& src,
    const std::shared_ptr<const OracleSurface>& dst, const GraphMorphism& g,
    const SearchBudget& budget = {}) {
  return std::make_shared<fdetail::RecoveredHom>(src, dst, g, budget);
}

/// The homomorphism of presentations induced by a graph morphism.
inline std::shared_ptr<FieldHomOracle> F_mor(const GraphOracle& src,
                                             const GraphOracle& dst,
                                             const GraphMorphism& g,
                                             const SearchBudget& budget = {}) {
  if (src.is_finite()) {
    long n = src.vertex_count();
    for (long i = 0; i < n; ++i) {
      long gi = g.apply(i);
      if (dst.is_finite() && gi >= dst.vertex_count()) {
        throw InputFormatError("morphism image leaves the target graph");
      }
    }
    if (!morphism_preserves_edges(src, dst, g, n)) {
      throw InputFormatError("vertex map is not a graph morphism");
    }
  }
  return recover_hom(F_obj(src), F_obj(dst), g, budget);
}

/// The vertex map induced by a field homomorphism: vertex i goes to the
/// index of the image of the i-th curve point.  Edge preservation and
/// reflection are verified on the decoded prefix.
inline GraphMorphism G_mor(const std::shared_ptr<const OracleSurface>& src,
                           const std::shared_ptr<const OracleSurface>& dst,
                           const FieldHomOracle& f, long n,
                           const SearchBudget& budget = {}) {
  if (n < 0) throw InputFormatError("vertex count must be a natural number");
  auto sex = fdetail::explorer_for(src, std::max(n, 1L));
  auto dex = fdetail::explorer_for(dst, std::max(n, 1L));
  std::vector<long> images;
  for (long i = 0; i < n; ++i) {
    XPoint p = sex->xpoint(i, budget);
    XPoint q{f.apply(p.a), f.apply(p.b)};
    images.push_back(dex->xpoint_index_of(q, budget));
  }
  GraphMorphism g = GraphMorphism::from_images(images);
  long nmax = 0;
  for (long v : images) nmax = std::max(nmax, v + 1);
  GraphOracle sg = G_obj(src, n, budget);
  GraphOracle dg = G_obj(dst, nmax, budget);
  if (!morphism_preserves_edges(sg, dg, g, n)) {
    throw NotAPoint("transported map does not preserve the edge relation");
  }
  return g;
}

}  // namespace towerfield
