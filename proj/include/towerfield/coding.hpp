#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "towerfield/rational.hpp"

namespace towerfield {

/// Bit-level primitives shared by the element serializer and the code
/// enumerator: a growable bit string, a cursor reader, the gamma code for
/// naturals, unary level tags, a continued-fraction code for rationals, and
/// the diagonal pairing on naturals.
///
/// All codes here are prefix-free, so concatenations parse without
/// separators; that property is what makes the element grammar self
/// delimiting and countable by length.

/// Append-only bit string.  Bit order is the order append was called in;
/// to_string renders '0'/'1' left to right in that same order.
class BitVec {
 public:
  BitVec() = default;

  void push(bool b) { bits_.push_back(b); }
  void append(const BitVec& o) { bits_.insert(bits_.end(), o.bits_.begin(), o.bits_.end()); }

  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  bool operator[](size_t i) const { return bits_[i]; }

  friend bool operator==(const BitVec& a, const BitVec& b) { return a.bits_ == b.bits_; }
  friend bool operator!=(const BitVec& a, const BitVec& b) { return !(a == b); }
  friend bool operator<(const BitVec& a, const BitVec& b) { return a.bits_ < b.bits_; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (bool b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }
  static BitVec from_string(const std::string& s) {
    BitVec v;
    v.bits_.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw std::invalid_argument("BitVec: bad character in bit string");
      v.bits_.push_back(c == '1');
    }
    return v;
  }

  /// Gamma code of n >= 0: with w = n + 1 and L = bitlen(w), emit L-1 zeros
  /// then the L bits of w (leading 1 first).  Code length 2L-1; there are 2^k
  /// codes of length 2k+1 and the value-order rank of n among all codes is n.
  void append_nat(const Int& n) {
    if (n < 0) throw std::domain_error("append_nat: negative");
    Int w = n + 1;
    size_t len = mpz_sizeinbase(w.get_mpz_t(), 2);
    for (size_t i = 0; i + 1 < len; ++i) push(false);
    for (size_t i = len; i-- > 0;) push(mpz_tstbit(w.get_mpz_t(), i) != 0);
  }

  /// Unary tag: j ones then a zero.  Length j + 1.
  void append_unary(long j) {
    if (j < 0) throw std::domain_error("append_unary: negative");
    for (long i = 0; i < j; ++i) push(true);
    push(false);
  }

  /// Two raw bits, high bit first.  Used for the 0..3 degree tag.
  void append_raw2(int k) {
    if (k < 0 || k > 3) throw std::domain_error("append_raw2: out of range");
    push((k & 2) != 0);
    push((k & 1) != 0);
  }

 private:
  std::vector<bool> bits_;
};

/// Cursor over a BitVec.  Overrun means a caller broke the self-delimiting
/// grammar, which is an internal invariant violation, not bad user input.
class BitReader {
 public:
  explicit BitReader(const BitVec& v) : v_(v) {}

  size_t pos() const { return pos_; }
  bool done() const { return pos_ == v_.size(); }

  bool read() {
    if (pos_ >= v_.size()) throw std::out_of_range("BitReader: read past end");
    return v_[pos_++];
  }

  Int read_nat() {
    size_t zeros = 0;
    while (!read()) ++zeros;
    Int w = 1;
    for (size_t i = 0; i < zeros; ++i) {
      w <<= 1;
      if (read()) w |= 1;
    }
    return w - 1;
  }

  long read_unary() {
    long j = 0;
    while (read()) ++j;
    return j;
  }

  int read_raw2() {
    int hi = read() ? 1 : 0;
    int lo = read() ? 1 : 0;
    return hi * 2 + lo;
  }

 private:
  const BitVec& v_;
  size_t pos_ = 0;
};

/// Length of the gamma code of n without materializing it.
inline size_t nat_code_length(const Int& n) {
  Int w = n + 1;
  return 2 * mpz_sizeinbase(w.get_mpz_t(), 2) - 1;
}

/// Continued-fraction quotients of a rational >= 1: m = [a0; a1, ..., ak]
/// with a0 >= 1, ai >= 1, and ak >= 2 when k >= 1 (the canonical form floor
/// division produces).  This list determines m uniquely.
inline std::vector<Int> cf_quotients(const Rat& m) {
  if (m < Rat(1)) throw std::domain_error("cf_quotients: argument below one");
  std::vector<Int> q;
  Int p = m.numerator(), d = m.denominator();
  while (d != 0) {
    Int a, r;
    mpz_fdiv_qr(a.get_mpz_t(), r.get_mpz_t(), p.get_mpz_t(), d.get_mpz_t());
    q.push_back(a);
    p = d;
    d = r;
  }
  return q;
}

inline Rat cf_value(const std::vector<Int>& q) {
  if (q.empty()) throw std::domain_error("cf_value: empty quotient list");
  // continuant recurrence, front to back: h/k converges to the value
  Int h1 = 1, h0 = 0, k1 = 0, k0 = 1;
  for (const Int& a : q) {
    Int h = a * h1 + h0;
    Int k = a * k1 + k0;
    h0 = h1;
    h1 = h;
    k0 = k1;
    k1 = k;
  }
  return Rat(h1, k1);
}

/// Rational bit code.  Grammar (prefix-free):
///
///   Q     := '0'                       value 0
///          | '1' CF INV SIGN          nonzero value
///   CF    := NAT(a0 - 1) QLIST        magnitude m = [a0; a1, ..., ak] >= 1
///   QLIST := '0'                      no further quotients
///          | '1' QREST
///   QREST := NATNZ(ai - 1) '0'        last quotient (ak >= 2)
///          | NAT(ai - 1) '1' QREST
///   INV   := '0' (value is 1/m, requires m > 1) | '1' (value is m)
///   SIGN  := '0' (positive) | '1' (negative)
///
/// Canonical continued fractions make this a bijection between bit strings
/// satisfying the two side conditions (last quotient >= 2, INV = '0' only
/// when m > 1) and the rationals.  Code length is linear in the bit size of
/// numerator and denominator.
inline void append_rational(BitVec& v, const Rat& r) {
  if (r.is_zero()) {
    v.push(false);
    return;
  }
  v.push(true);
  Rat a = r.sign() < 0 ? -r : r;
  bool direct = a >= Rat(1);
  Rat m = direct ? a : a.inv();
  std::vector<Int> q = cf_quotients(m);
  v.append_nat(q[0] - 1);
  if (q.size() == 1) {
    v.push(false);
  } else {
    v.push(true);
    for (size_t i = 1; i < q.size(); ++i) {
      v.append_nat(q[i] - 1);
      v.push(i + 1 < q.size());
    }
  }
  v.push(direct);
  v.push(r.sign() < 0);
}

inline Rat read_rational(BitReader& rd) {
  if (!rd.read()) return Rat(0);
  std::vector<Int> q;
  q.push_back(rd.read_nat() + 1);
  if (rd.read()) {
    for (;;) {
      q.push_back(rd.read_nat() + 1);
      if (!rd.read()) break;
    }
    if (q.back() < 2) throw std::logic_error("read_rational: non-canonical final quotient");
  }
  bool direct = rd.read();
  bool negative = rd.read();
  Rat m = cf_value(q);
  if (!direct && m == Rat(1)) throw std::logic_error("read_rational: reciprocal of one");
  Rat a = direct ? m : m.inv();
  return negative ? -a : a;
}

/// Diagonal pairing (a, b) -> (a+b)(a+b+1)/2 + b, a bijection on naturals
/// monotone in each argument.
inline Int pair_code(const Int& a, const Int& b) {
  if (a < 0 || b < 0) throw std::domain_error("pair_code: negative");
  Int s = a + b;
  return s * (s + 1) / 2 + b;
}

inline std::pair<Int, Int> pair_split(const Int& n) {
  if (n < 0) throw std::domain_error("pair_split: negative");
  // s = floor((sqrt(8n+1) - 1) / 2), the diagonal containing n
  Int disc = 8 * n + 1;
  Int root;
  mpz_sqrt(root.get_mpz_t(), disc.get_mpz_t());
  Int s = (root - 1) / 2;
  while (s * (s + 1) / 2 > n) --s;
  while ((s + 1) * (s + 2) / 2 <= n) ++s;
  Int b = n - s * (s + 1) / 2;
  return {s - b, b};
}

}  // namespace towerfield
