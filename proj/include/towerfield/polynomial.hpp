#pragma once

#include <algorithm>
#include <concepts>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "towerfield/rational.hpp"

namespace towerfield {

/// Coefficient requirements for Poly / RatFn.  Every layer of the tower
/// (Rat, RatFn over a lower layer, tower elements themselves) satisfies this.
template <typename K>
concept field_like = requires(const K& a, const K& b) {
  { a + b } -> std::convertible_to<K>;
  { a - b } -> std::convertible_to<K>;
  { a* b } -> std::convertible_to<K>;
  { a / b } -> std::convertible_to<K>;
  { -a } -> std::convertible_to<K>;
  { a == b } -> std::convertible_to<bool>;
  { a.is_zero() } -> std::convertible_to<bool>;
  requires std::default_initializable<K>;   // default value is the zero element
  requires std::constructible_from<K, long>;
};

/// Dense univariate polynomial over a field.
///
/// Invariant: coefficient vector is empty (zero polynomial) or has a nonzero
/// leading entry.  degree() is -1 for zero.
///
/// The class template is deliberately unconstrained so that Poly<K> can be
/// named while K is still incomplete (the tower element type contains
/// rational functions over itself); the field_like requirements bind at the
/// free algorithms below instead.
template <typename K>
class Poly {
 public:
  Poly() = default;
  explicit Poly(K c) { coeffs_.push_back(std::move(c)); trim(); }
  explicit Poly(long c) : Poly(K(c)) {}
  explicit Poly(std::vector<K> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static Poly monomial(K c, int deg) {
    Poly p;
    if (!c.is_zero()) {
      p.coeffs_.assign(static_cast<size_t>(deg) + 1, K());
      p.coeffs_.back() = std::move(c);
    }
    return p;
  }
  /// The generator x itself.
  static Poly variable() { return monomial(K(1), 1); }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return coeffs_.empty(); }
  bool is_constant() const { return coeffs_.size() <= 1; }
  bool is_one() const { return coeffs_.size() == 1 && coeffs_[0] == K(1); }

  /// Coefficient of x^i (zero beyond the degree).
  const K& coeff(int i) const {
    static const K kZero{};
    if (i < 0 || i >= static_cast<int>(coeffs_.size())) return kZero;
    return coeffs_[static_cast<size_t>(i)];
  }
  const K& leading() const {
    if (is_zero()) throw std::domain_error("Poly: leading coefficient of zero");
    return coeffs_.back();
  }
  const std::vector<K>& coeffs() const { return coeffs_; }

  Poly operator-() const {
    Poly r(*this);
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  friend Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.coeffs_.resize(std::max(a.coeffs_.size(), b.coeffs_.size()), K());
    for (size_t i = 0; i < r.coeffs_.size(); ++i) r.coeffs_[i] = a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i));
    r.trim();
    return r;
  }
  friend Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    Poly r;
    r.coeffs_.assign(a.coeffs_.size() + b.coeffs_.size() - 1, K());
    for (size_t i = 0; i < a.coeffs_.size(); ++i) {
      if (a.coeffs_[i].is_zero()) continue;
      for (size_t j = 0; j < b.coeffs_.size(); ++j) {
        r.coeffs_[i + j] = r.coeffs_[i + j] + a.coeffs_[i] * b.coeffs_[j];
      }
    }
    r.trim();
    return r;
  }
  friend Poly operator*(const Poly& a, const K& s) {
    Poly r;
    if (s.is_zero()) return r;
    r.coeffs_ = a.coeffs_;
    for (auto& c : r.coeffs_) c = c * s;
    r.trim();
    return r;
  }
  friend Poly operator*(const K& s, const Poly& a) { return a * s; }

  friend bool operator==(const Poly& a, const Poly& b) {
    if (a.coeffs_.size() != b.coeffs_.size()) return false;
    for (size_t i = 0; i < a.coeffs_.size(); ++i)
      if (!(a.coeffs_[i] == b.coeffs_[i])) return false;
    return true;
  }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  Poly monic() const {
    if (is_zero()) return *this;
    const K& l = leading();
    if (l == K(1)) return *this;
    Poly r(*this);
    for (auto& c : r.coeffs_) c = c / l;
    return r;
  }

  template <typename V>
  V eval(const V& x) const {
    V acc{};
    for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + V(coeffs_[i]);
    return acc;
  }
  /// Horner evaluation when V is not constructible from K (interval contexts):
  /// the caller supplies the coefficient images.
  template <typename V, typename F>
  V eval_mapped(const V& x, F&& map_coeff) const {
    V acc{};
    for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + map_coeff(coeffs_[i]);
    return acc;
  }

  std::string to_string(const std::string& var = "x") const {
    if (is_zero()) return "0";
    std::string s;
    for (size_t i = coeffs_.size(); i-- > 0;) {
      if (coeffs_[i].is_zero()) continue;
      if (!s.empty()) s += " + ";
      s += "(" + element_repr(coeffs_[i]) + ")";
      if (i >= 1) s += "*" + var + (i > 1 ? "^" + std::to_string(i) : "");
    }
    return s;
  }

 private:
  template <typename T>
  static auto element_repr(const T& t) -> decltype(t.to_string()) { return t.to_string(); }

  void trim() {
    while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
  }

  std::vector<K> coeffs_;
};

/// Euclidean division: a = q*b + r with deg r < deg b.  Exact over a field.
/// The divisor's leading coefficient is inverted once up front; inversion can
/// be expensive deep in the tower.
template <field_like K>
std::pair<Poly<K>, Poly<K>> divmod(const Poly<K>& a, const Poly<K>& b) {
  if (b.is_zero()) throw std::domain_error("Poly: division by zero polynomial");
  std::vector<K> rem(a.coeffs());
  std::vector<K> quot;
  int db = b.degree();
  int da = static_cast<int>(rem.size()) - 1;
  if (da >= db) quot.assign(static_cast<size_t>(da - db) + 1, K());
  const bool monic = b.leading() == K(1);
  const K lead_inv = monic ? K(1) : K(1) / b.leading();
  for (int i = da; i >= db; --i) {
    K c = rem[static_cast<size_t>(i)];
    if (c.is_zero()) continue;
    K f = monic ? std::move(c) : c * lead_inv;
    for (int j = 0; j <= db; ++j) {
      rem[static_cast<size_t>(i - db + j)] = rem[static_cast<size_t>(i - db + j)] - f * b.coeff(j);
    }
    quot[static_cast<size_t>(i - db)] = std::move(f);
  }
  return {Poly<K>(std::move(quot)), Poly<K>(std::move(rem))};
}

/// Pseudo-division over a coefficient ring (no coefficient inversion):
/// lead(b)^(deg a - deg b + 1) * a = q*b + r with deg r < deg b.
template <typename C>
std::pair<Poly<C>, Poly<C>> pseudo_divmod(const Poly<C>& a, const Poly<C>& b) {
  if (b.is_zero()) throw std::domain_error("Poly: pseudo-division by zero");
  Poly<C> r = a;
  Poly<C> q;
  const C& l = b.leading();
  int e = a.degree() - b.degree() + 1;
  if (e < 0) e = 0;
  while (!r.is_zero() && r.degree() >= b.degree()) {
    int k = r.degree() - b.degree();
    Poly<C> mono = Poly<C>::monomial(r.leading(), k);
    q = q * l + mono;
    r = r * l - mono * b;
    --e;
  }
  for (; e > 0; --e) {
    q = q * l;
    r = r * l;
  }
  return {std::move(q), std::move(r)};
}

/// Monic gcd by the Euclidean ladder.
template <field_like K>
Poly<K> poly_gcd(Poly<K> a, Poly<K> b) {
  while (!b.is_zero()) {
    auto [q, r] = divmod(a, b);
    (void)q;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

/// Monic gcd over the rationals via the integer primitive remainder
/// sequence.  The generic Euclidean ladder roughly squares coefficient
/// bit-length per step, which is ruinous past degree ~15; clearing to Z[x]
/// and stripping integer content after every pseudo-remainder keeps the
/// coefficients small.  This overload beats the template for K = Rat.
inline Poly<Rat> poly_gcd(const Poly<Rat>& a, const Poly<Rat>& b) {
  if (a.is_zero()) return b.is_zero() ? b : b.monic();
  if (b.is_zero()) return a.monic();
  auto lift = [](const Poly<Rat>& p) {
    Int den = 1;
    for (int i = 0; i <= p.degree(); ++i) den = lcm(den, p.coeff(i).denominator());
    std::vector<Int> c(static_cast<size_t>(p.degree()) + 1);
    for (int i = 0; i <= p.degree(); ++i) {
      const Rat& q = p.coeff(i);
      c[static_cast<size_t>(i)] = q.numerator() * (den / q.denominator());
    }
    return c;
  };
  auto strip = [](std::vector<Int>& c) {
    while (!c.empty() && c.back() == 0) c.pop_back();
    if (c.empty()) return;
    Int g = 0;
    for (const Int& x : c) g = gcd(g, x);
    if (sgn(c.back()) < 0) g = -g;
    for (Int& x : c) x /= g;
  };
  std::vector<Int> A = lift(a), B = lift(b);
  strip(A);
  strip(B);
  if (A.size() < B.size()) A.swap(B);
  while (B.size() > 1) {
    // pseudo-remainder of A by B; content is stripped immediately after, so
    // the exact pseudo-power scaling is irrelevant
    std::vector<Int> R = A;
    const Int& lb = B.back();
    while (R.size() >= B.size()) {
      const Int lr = R.back();
      const size_t shift = R.size() - B.size();
      for (Int& x : R) x *= lb;
      for (size_t j = 0; j < B.size(); ++j) R[shift + j] -= lr * B[j];
      while (!R.empty() && R.back() == 0) R.pop_back();
    }
    strip(R);
    A.swap(B);
    B.swap(R);
  }
  if (!B.empty()) return Poly<Rat>(Rat(1));
  const Int& lead = A.back();
  std::vector<Rat> out(A.size());
  for (size_t i = 0; i < A.size(); ++i) out[i] = Rat(A[i], lead);
  return Poly<Rat>(std::move(out));
}

/// Extended gcd: returns (g, s, t) with s*a + t*b = g and g monic (or zero).
template <field_like K>
std::tuple<Poly<K>, Poly<K>, Poly<K>> poly_ext_gcd(const Poly<K>& a, const Poly<K>& b) {
  Poly<K> r0 = a, r1 = b;
  Poly<K> s0(K(1)), s1;
  Poly<K> t0, t1(K(1));
  while (!r1.is_zero()) {
    auto [q, r] = divmod(r0, r1);
    Poly<K> s2 = s0 - q * s1;
    Poly<K> t2 = t0 - q * t1;
    r0 = std::move(r1); r1 = std::move(r);
    s0 = std::move(s1); s1 = std::move(s2);
    t0 = std::move(t1); t1 = std::move(t2);
  }
  if (r0.is_zero()) return {r0, s0, t0};
  const K lead = r0.leading();
  if (lead == K(1)) return {r0, s0, t0};
  K inv_lead = K(1) / lead;
  auto scale = [&inv_lead](const Poly<K>& p) {
    return p * inv_lead;
  };
  return {scale(r0), scale(s0), scale(t0)};
}

}  // namespace towerfield
