#pragma once

#include <array>
#include <memory>
#include <stdexcept>
#include <utility>

#include "towerfield/coding.hpp"
#include "towerfield/tower.hpp"

namespace towerfield {

/// Bumped whenever the bit grammar changes; code ranks depend on the byte
/// form, so dumps carry this tag and replay rejects nothing silently.
inline constexpr const char* kSerialFormatVersion = "1";

/// Element serialization, version 1 (see kSerialFormatVersion).
///
/// Every canonical tower element maps to a unique self-delimiting bit string
/// determined by its column (column 0 rationals, column 2m for top X-level m,
/// column 2s-1 for top Z-level s).  The payload grammar:
///
///   column 0:       Q                  (rational code, coding.hpp)
///   column 2m:      XDATA(m)
///   column 2s-1:    ZDATA(s)
///
///   XDATA(j) := RAW2(k) c_0 ... c_k    coefficients of powers 0..k of the
///                                      level-j algebraic generator, each an
///                                      RF over ELEMK(j-1); c_k nonzero when
///                                      k >= 1, c_0 nonconstant when k = 0
///   ZDATA(s):  same shape, coefficients RF over ELEMW(s-1)
///
///   ELEMK(0)           := Q
///   ELEMK(m), m >= 1   := UN(j) (j = 0: Q | j >= 1: XDATA(j)),  j <= m
///   ELEMKANY           := UN(j) (j = 0: Q | j >= 1: XDATA(j)),  j unbounded
///   ELEMW(0)           := ELEMKANY
///   ELEMW(s), s >= 1   := UN(sigma) (sigma = 0: ELEMKANY | ZDATA(sigma)),
///                         sigma <= s
///
/// UN(j) is the unary tag from coding.hpp; the tag is always the exact
/// support of the sub-element, matching the canonical form's minimal levels,
/// which is what makes serialization a bijection.
///
/// Rational functions are written as polynomial continued fractions:
///
///   RF(C)    := POLY(C) DLIST(C)       f = a_0 + 1/(a_1 + 1/(...))
///   POLY(C)  := '0' | '1' REST(C)
///   REST(C)  := CNZ(C) '0' | C '1' REST(C)    coefficients ascending degree
///   DPOLY(C) := C '1' REST(C)                 degree >= 1
///   DLIST(C) := '0' | '1' DPOLY(C) DLIST(C)
///
/// The partial quotients of a reduced fraction with monic denominator are
/// produced by polynomial Euclid with no choices, all quotients past the
/// first have degree >= 1, and the continuant identity makes the
/// reconstructed fraction coprime, so RF is a bijection onto the canonical
/// rational functions.
namespace serial_detail {

/// Coefficient context: which family the sub-element grammar draws from
/// (is_w selects ELEMW over ELEMK) and the exclusive level bound (0 means
/// the untagged base case).
struct CoefCtx {
  bool is_w = false;
  long bound = 0;
};

void append_elem(BitVec& v, const TowerElem& e, CoefCtx ctx);
TowerElem read_elem(BitReader& rd, const std::shared_ptr<const Tower>& tower, CoefCtx ctx);

inline void append_poly(BitVec& v, const Poly<TowerElem>& p, CoefCtx ctx, bool deg_flag) {
  if (deg_flag) {
    if (p.is_zero()) {
      v.push(false);
      return;
    }
    v.push(true);
  } else if (p.degree() < 1) {
    throw std::logic_error("serialize: partial quotient of degree < 1");
  }
  const auto& cs = p.coeffs();
  for (size_t i = 0; i < cs.size(); ++i) {
    append_elem(v, cs[i], ctx);
    v.push(i + 1 < cs.size());
  }
}

inline Poly<TowerElem> read_poly(BitReader& rd, const std::shared_ptr<const Tower>& tower,
                                 CoefCtx ctx, bool deg_flag) {
  if (deg_flag && !rd.read()) return Poly<TowerElem>();
  std::vector<TowerElem> cs;
  for (;;) {
    cs.push_back(read_elem(rd, tower, ctx));
    if (!rd.read()) break;
  }
  if (cs.back().is_zero()) throw std::logic_error("parse: zero leading coefficient");
  if (!deg_flag && cs.size() < 2) throw std::logic_error("parse: partial quotient of degree < 1");
  return Poly<TowerElem>(std::move(cs));
}

inline void append_rf(BitVec& v, const RatFn<TowerElem>& f, CoefCtx ctx) {
  auto [a0, r0] = divmod(f.num(), f.den());
  append_poly(v, a0, ctx, true);
  Poly<TowerElem> a = f.den(), b = r0;
  while (!b.is_zero()) {
    auto [q, r] = divmod(a, b);
    v.push(true);
    append_poly(v, q, ctx, false);
    a = std::move(b);
    b = std::move(r);
  }
  v.push(false);
}

inline RatFn<TowerElem> read_rf(BitReader& rd, const std::shared_ptr<const Tower>& tower,
                                CoefCtx ctx) {
  Poly<TowerElem> a0 = read_poly(rd, tower, ctx, true);
  // continuant recurrence: num/den of the truncated fraction
  Poly<TowerElem> h1 = a0, h0 = Poly<TowerElem>(1L);
  Poly<TowerElem> k1 = Poly<TowerElem>(1L), k0;
  while (rd.read()) {
    Poly<TowerElem> q = read_poly(rd, tower, ctx, false);
    Poly<TowerElem> h = q * h1 + h0;
    Poly<TowerElem> k = q * k1 + k0;
    h0 = std::move(h1);
    h1 = std::move(h);
    k0 = std::move(k1);
    k1 = std::move(k);
  }
  return RatFn<TowerElem>(std::move(h1), std::move(k1));
}

/// Coefficient block of an element topped by an X or Z level; the level is
/// implied by context (the column, or the support tag just written).
inline void append_xzdata(BitVec& v, const TowerElem& e) {
  const auto& co = e.ext();
  int k = 3;
  while (k > 0 && co[static_cast<size_t>(k)].is_zero()) --k;
  v.append_raw2(k);
  LevelRef top = e.top_level();
  CoefCtx ctx{top.is_z, top.index - 1};
  for (int i = 0; i <= k; ++i) append_rf(v, co[static_cast<size_t>(i)], ctx);
}

inline TowerElem read_xzdata(BitReader& rd, const std::shared_ptr<const Tower>& tower,
                             LevelRef top) {
  int k = rd.read_raw2();
  CoefCtx ctx{top.is_z, top.index - 1};
  std::array<RatFn<TowerElem>, 4> co{};
  for (int i = 0; i <= k; ++i) co[static_cast<size_t>(i)] = read_rf(rd, tower, ctx);
  if (k >= 1 && co[static_cast<size_t>(k)].is_zero())
    throw std::logic_error("parse: zero top coefficient");
  if (k == 0 && co[0].is_constant()) throw std::logic_error("parse: collapsible coefficient block");
  TowerElem e = TowerElem::from_level(tower, top, std::move(co));
  if (e.is_rational() || !(e.top_level() == top))
    throw std::logic_error("parse: coefficient block did not assemble at its level");
  return e;
}

inline void append_elem_k_any(BitVec& v, const TowerElem& e) {
  Support sup = e.support();
  v.append_unary(sup.m);
  if (sup.m == 0) {
    append_rational(v, e.rational_value());
  } else {
    append_xzdata(v, e);
  }
}

inline TowerElem read_elem_k_any(BitReader& rd, const std::shared_ptr<const Tower>& tower) {
  long j = rd.read_unary();
  if (j == 0) return TowerElem(read_rational(rd));
  return read_xzdata(rd, tower, LevelRef{false, static_cast<int>(j)});
}

inline void append_elem(BitVec& v, const TowerElem& e, CoefCtx ctx) {
  Support sup = e.support();
  if (!ctx.is_w) {
    if (sup.s != 0 || sup.m > ctx.bound)
      throw std::logic_error("serialize: element above its coefficient bound");
    if (ctx.bound == 0) {
      append_rational(v, e.rational_value());
      return;
    }
    v.append_unary(sup.m);
    if (sup.m == 0) {
      append_rational(v, e.rational_value());
    } else {
      append_xzdata(v, e);
    }
    return;
  }
  if (sup.s > ctx.bound) throw std::logic_error("serialize: element above its coefficient bound");
  if (ctx.bound == 0) {
    append_elem_k_any(v, e);
    return;
  }
  v.append_unary(sup.s);
  if (sup.s == 0) {
    append_elem_k_any(v, e);
  } else {
    append_xzdata(v, e);
  }
}

inline TowerElem read_elem(BitReader& rd, const std::shared_ptr<const Tower>& tower, CoefCtx ctx) {
  if (!ctx.is_w) {
    if (ctx.bound == 0) return TowerElem(read_rational(rd));
    long j = rd.read_unary();
    if (j > ctx.bound) throw std::logic_error("parse: support tag above bound");
    if (j == 0) return TowerElem(read_rational(rd));
    return read_xzdata(rd, tower, LevelRef{false, static_cast<int>(j)});
  }
  if (ctx.bound == 0) return read_elem_k_any(rd, tower);
  long sg = rd.read_unary();
  if (sg > ctx.bound) throw std::logic_error("parse: support tag above bound");
  if (sg == 0) return read_elem_k_any(rd, tower);
  return read_xzdata(rd, tower, LevelRef{true, static_cast<int>(sg)});
}

}  // namespace serial_detail

/// Top level of the column holding the given column number.
inline LevelRef column_level(long column) {
  if (column <= 0) throw std::domain_error("column_level: no level for column 0");
  if (column % 2 == 0) return LevelRef{false, static_cast<int>(column / 2)};
  return LevelRef{true, static_cast<int>((column + 1) / 2)};
}

/// Column payload of an element (the column itself is column_of(support)).
inline BitVec serialize_element(const TowerElem& e) {
  BitVec v;
  if (e.is_rational()) {
    append_rational(v, e.rational_value());
  } else {
    serial_detail::append_xzdata(v, e);
  }
  return v;
}

/// Parse one column payload; the cursor is left just past it.
inline TowerElem parse_element(BitReader& rd, const std::shared_ptr<const Tower>& tower,
                               long column) {
  if (column == 0) return TowerElem(read_rational(rd));
  TowerElem e = serial_detail::read_xzdata(rd, tower, column_level(column));
  if (column_of(e.support()) != column)
    throw std::logic_error("parse: payload landed in the wrong column");
  return e;
}

}  // namespace towerfield
