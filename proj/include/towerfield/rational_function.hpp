#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "towerfield/polynomial.hpp"

namespace towerfield {

/// Rational function num/den over a field K.
///
/// Canonical form invariants:
///   * den is monic and nonzero,
///   * gcd(num, den) = 1,
///   * zero is 0/1.
/// Equality is therefore structural.
///
/// Unconstrained for the same incomplete-type reason as Poly.
template <typename K>
class RatFn {
 public:
  RatFn() : num_(), den_(Poly<K>(K(1))) {}
  explicit RatFn(K c) : num_(Poly<K>(std::move(c))), den_(Poly<K>(K(1))) {}
  explicit RatFn(long c) : RatFn(K(c)) {}
  explicit RatFn(Poly<K> p) : num_(std::move(p)), den_(Poly<K>(K(1))) {}
  RatFn(Poly<K> num, Poly<K> den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::domain_error("RatFn: zero denominator");
    reduce();
  }

  static RatFn variable() { return RatFn(Poly<K>::variable()); }

  const Poly<K>& num() const { return num_; }
  const Poly<K>& den() const { return den_; }

  bool is_zero() const { return num_.is_zero(); }
  bool is_one() const { return num_.is_one() && den_.is_one(); }
  /// True when the value lies in K itself (denominator 1, numerator constant).
  bool is_constant() const { return num_.is_constant() && den_.is_one(); }
  K constant_value() const {
    if (!is_constant()) throw std::domain_error("RatFn: not a constant");
    return num_.is_zero() ? K() : num_.coeff(0);
  }

  RatFn operator-() const { return RatFn(UncheckedTag{}, -num_, den_); }

  friend RatFn operator+(const RatFn& a, const RatFn& b) { return add_impl(a, b, false); }
  friend RatFn operator-(const RatFn& a, const RatFn& b) { return add_impl(a, b, true); }

  /// Cross-cancellation product: cancelling gcd(num, other den) up front
  /// keeps gcd input degrees minimal and leaves a result that is already
  /// coprime with monic denominator.
  friend RatFn operator*(const RatFn& a, const RatFn& b) {
    if (a.is_zero() || b.is_zero()) return RatFn();
    if (a.den_.is_one() && b.den_.is_one()) {
      return RatFn(UncheckedTag{}, a.num_ * b.num_, a.den_);
    }
    Poly<K> n1 = a.num_, d2 = b.den_;
    if (n1.degree() > 0 && d2.degree() > 0) {
      Poly<K> g = poly_gcd(n1, d2);
      if (g.degree() > 0) {
        n1 = divmod(n1, g).first;
        d2 = divmod(d2, g).first;
      }
    }
    Poly<K> n2 = b.num_, d1 = a.den_;
    if (n2.degree() > 0 && d1.degree() > 0) {
      Poly<K> g = poly_gcd(n2, d1);
      if (g.degree() > 0) {
        n2 = divmod(n2, g).first;
        d1 = divmod(d1, g).first;
      }
    }
    return RatFn(UncheckedTag{}, n1 * n2, d1 * d2);
  }
  friend RatFn operator/(const RatFn& a, const RatFn& b) {
    if (b.is_zero()) throw std::domain_error("RatFn: division by zero");
    return a * b.inv();
  }

  RatFn inv() const {
    if (is_zero()) throw std::domain_error("RatFn: inverse of zero");
    // swap of a canonical fraction is coprime already; only re-normalize
    // the new denominator to monic
    Poly<K> n = den_, d = num_;
    const K& lead = d.leading();
    if (!(lead == K(1))) {
      K il = K(1) / lead;
      n = n * il;
      d = d * il;
    }
    return RatFn(UncheckedTag{}, std::move(n), std::move(d));
  }

  friend bool operator==(const RatFn& a, const RatFn& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const RatFn& a, const RatFn& b) { return !(a == b); }

  /// Evaluate at a point of K; throws if the denominator vanishes there.
  K eval(const K& x) const {
    K d = den_.eval(x);
    if (d.is_zero()) throw std::domain_error("RatFn: pole at evaluation point");
    return num_.eval(x) / d;
  }

  std::string to_string(const std::string& var = "x") const {
    if (den_.is_one()) return num_.to_string(var);
    return "(" + num_.to_string(var) + ") / (" + den_.to_string(var) + ")";
  }

 private:
  struct UncheckedTag {};
  RatFn(UncheckedTag, Poly<K> num, Poly<K> den) : num_(std::move(num)), den_(std::move(den)) {}

  /// Addition by the denominator-gcd scheme: with d1 = g*d1', d2 = g*d2'
  /// the sum is (n1*d2' + n2*d1') / (d1*d2'), and the only possible common
  /// factor of that fraction divides g, so the cleanup gcd runs at degree
  /// <= deg g instead of deg d1 + deg d2.
  static RatFn add_impl(const RatFn& a, const RatFn& b, bool sub) {
    if (a.is_zero()) return sub ? -b : b;
    if (b.is_zero()) return a;
    auto comb = [sub](const Poly<K>& x, const Poly<K>& y) {
      return sub ? x - y : x + y;
    };
    const Poly<K>& n1 = a.num_;
    const Poly<K>& d1 = a.den_;
    const Poly<K>& n2 = b.num_;
    const Poly<K>& d2 = b.den_;
    if (d1.is_one()) {
      if (d2.is_one()) {
        Poly<K> num = comb(n1, n2);
        if (num.is_zero()) return RatFn();
        return RatFn(UncheckedTag{}, std::move(num), d1);
      }
      // n2 coprime to d2, so the sum is too
      return RatFn(UncheckedTag{}, comb(n1 * d2, n2), d2);
    }
    if (d2.is_one()) return RatFn(UncheckedTag{}, comb(n1, n2 * d1), d1);
    if (d1 == d2) {
      Poly<K> num = comb(n1, n2);
      if (num.is_zero()) return RatFn();
      return RatFn(std::move(num), d1);
    }
    Poly<K> g = poly_gcd(d1, d2);
    if (g.degree() == 0) {
      // coprime denominators: the combined fraction is already canonical
      return RatFn(UncheckedTag{}, comb(n1 * d2, n2 * d1), d1 * d2);
    }
    Poly<K> d1r = divmod(d1, g).first;
    Poly<K> d2r = divmod(d2, g).first;
    Poly<K> num = comb(n1 * d2r, n2 * d1r);
    if (num.is_zero()) return RatFn();
    Poly<K> h = poly_gcd(num, g);
    if (h.degree() > 0) {
      num = divmod(num, h).first;
      return RatFn(UncheckedTag{}, std::move(num), divmod(d1, h).first * d2r);
    }
    return RatFn(UncheckedTag{}, std::move(num), d1 * d2r);
  }

  void reduce() {
    if (num_.is_zero()) {
      den_ = Poly<K>(K(1));
      return;
    }
    if (den_.is_one()) return;  // common case: polynomial values stay cheap
    if (den_.degree() > 0 && num_.degree() > 0) {
      Poly<K> g = poly_gcd(num_, den_);
      if (g.degree() > 0) {
        num_ = divmod(num_, g).first;
        den_ = divmod(den_, g).first;
      }
    }
    const K lead = den_.leading();
    if (!(lead == K(1))) {
      K il = K(1) / lead;
      num_ = num_ * il;
      den_ = den_ * il;
    }
  }

  Poly<K> num_;
  Poly<K> den_;
};

}  // namespace towerfield
