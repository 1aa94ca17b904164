#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "towerfield/coding.hpp"

namespace towerfield {

/// Census engine for the serialization grammar: counts the valid payload
/// strings of every bit length, and converts between strings and their rank
/// in the canonical enumeration order.
///
/// Order: shorter strings first; within one length, the structural order of
/// the grammar (branches in the documented order, concatenations compared by
/// first-component length, then first-component rank, then the remainder).
/// Every counting recursion strictly decreases the length, so the tables
/// close; counts are exact big integers.
///
/// A census is parameterized by the vertex bound: n for an n-vertex graph
/// (support tags capped at n, pair levels at n(n-1)/2, only those columns
/// realized), or unbounded for an infinite graph (every column realized).
/// Counts at length L only ever depend on min(bound, L), which keeps the
/// unbounded tables finite.
class GrammarCensus {
 public:
  explicit GrammarCensus(long vertex_bound) : nbound_(vertex_bound) {}

  long vertex_bound() const { return nbound_; }

  bool column_realized(long column) const {
    if (column < 0) return false;
    if (nbound_ < 0 || column == 0) return true;
    if (column % 2 == 0) return column / 2 <= nbound_;
    return (column + 1) / 2 <= nbound_ * (nbound_ - 1) / 2;
  }

  /// Number of payload strings of the column with exactly `len` bits.
  Int payload_count(long column, long len) {
    std::lock_guard<std::mutex> lk(mu_);
    return cnt(payload_type(column), len);
  }

  /// Global length-major rank of a payload within its column.
  Int payload_rank(long column, const BitVec& bits) {
    std::lock_guard<std::mutex> lk(mu_);
    TypeId t = payload_type(column);
    BitReader rd(bits);
    Parsed p = rank_parse(t, rd);
    if (!rd.done() || p.len != static_cast<long>(bits.size()))
      throw std::logic_error("payload_rank: trailing bits");
    Int r = p.rank;
    for (long l = 1; l < p.len; ++l) r += cnt(t, l);
    return r;
  }

  /// Inverse of payload_rank; every rank is realized in every column.
  BitVec payload_unrank(long column, const Int& rank) {
    if (rank < 0) throw std::domain_error("payload_unrank: negative rank");
    std::lock_guard<std::mutex> lk(mu_);
    TypeId t = payload_type(column);
    Int r = rank;
    for (long l = 1;; ++l) {
      Int c = cnt(t, l);
      if (r < c) {
        BitVec out;
        unrank_emit(t, l, r, out);
        return out;
      }
      r -= c;
    }
  }

  /// Sequential serial: NAT(column) then the payload, enumerated over all
  /// realized columns at once.  Rank of a given serial.
  Int seq_rank(long column, const BitVec& payload) {
    if (!column_realized(column)) throw std::domain_error("seq_rank: column not realized");
    std::lock_guard<std::mutex> lk(mu_);
    TypeId t = payload_type(column);
    BitReader rd(payload);
    Parsed p = rank_parse(t, rd);
    if (!rd.done()) throw std::logic_error("seq_rank: trailing bits");
    long natlen = static_cast<long>(nat_code_length(Int(column)));
    long total = natlen + p.len;
    Int r = p.rank + seq_prior(column, total);
    for (long l = 1; l < total; ++l) r += seq_count_locked(l);
    return r;
  }

  std::pair<long, BitVec> seq_unrank(const Int& rank) {
    if (rank < 0) throw std::domain_error("seq_unrank: negative rank");
    std::lock_guard<std::mutex> lk(mu_);
    Int r = rank;
    for (long total = 2;; ++total) {
      Int c = seq_count_locked(total);
      if (r < c) return seq_unrank_in(total, r);
      r -= c;
    }
  }

  Int seq_count(long len) {
    std::lock_guard<std::mutex> lk(mu_);
    return seq_count_locked(len);
  }

  /// Shared census per vertex bound; the tables depend on nothing else.
  static std::shared_ptr<GrammarCensus> for_bound(long vertex_bound) {
    static std::mutex reg_mu;
    static std::map<long, std::shared_ptr<GrammarCensus>> reg;
    std::lock_guard<std::mutex> lk(reg_mu);
    auto& slot = reg[vertex_bound];
    if (!slot) slot = std::make_shared<GrammarCensus>(vertex_bound);
    return slot;
  }

 private:
  enum class Kind : uint8_t {
    NAT,
    NATNZ,
    Q,
    QCF,
    QLIST,
    QREST,
    ELEM,   // w false: ELEMK(level); w true: ELEMW(level)
    XDATA,  // level = top X index
    ZDATA,  // level = top Z index
    RF,
    RFNZ,
    RFNCQ,
    POLY,
    REST,
    DPOLY,
    DLIST,
    CNZ,
    RFTAIL,  // aux RFs then one RFNZ
    GSEQ,
  };

  struct TypeId {
    Kind kind;
    bool w = false;
    long level = 0;
    int aux = 0;
  };

  struct Parsed {
    long len = 0;
    Int rank;
  };

  long nbound_;
  std::mutex mu_;
  std::map<std::tuple<int, bool, long, int>, std::vector<Int>> memo_;

  long kany_level() const { return nbound_ < 0 ? -1 : nbound_; }

  TypeId payload_type(long column) const {
    if (column < 0) throw std::domain_error("payload_type: negative column");
    if (column == 0) return {Kind::Q};
    if (column % 2 == 0) return {Kind::XDATA, false, column / 2};
    return {Kind::ZDATA, false, (column + 1) / 2};
  }

  // Level bounds only matter up to the string length, so keys clamp there;
  // -1 (unbounded) clamps too, which is what keeps the tables finite.
  static long clamp_level(long level, long len) {
    if (level < 0 || level > len) return len;
    return level;
  }

  static bool kind_has_level(Kind k) {
    switch (k) {
      case Kind::NAT:
      case Kind::NATNZ:
      case Kind::Q:
      case Kind::QCF:
      case Kind::QLIST:
      case Kind::QREST:
      case Kind::GSEQ:
        return false;
      default:
        return true;
    }
  }

  TypeId coef_type(const TypeId& t) const {
    // coefficient element type of the RF family node
    return {Kind::ELEM, t.w, t.level};
  }

  long zero_len(bool w, long level) const {
    if (!w) return level == 0 ? 1 : 2;
    if (level == 0) return zero_len(false, kany_level());
    return 1 + zero_len(true, 0);
  }

  Int cnt(TypeId t, long len) {
    if (len <= 0) return 0;
    long lv = kind_has_level(t.kind) ? clamp_level(t.level, len) : 0;
    auto key = std::make_tuple(static_cast<int>(t.kind), t.w, lv, t.aux);
    {
      auto& vec = memo_[key];
      if (static_cast<long>(vec.size()) <= len) vec.resize(static_cast<size_t>(len) + 1, Int(-1));
      if (vec[static_cast<size_t>(len)] >= 0) return vec[static_cast<size_t>(len)];
    }
    Int value = compute_cnt(TypeId{t.kind, t.w, lv, t.aux}, len);
    // recursive fills may have resized the vector; re-locate before storing
    memo_[key][static_cast<size_t>(len)] = value;
    return value;
  }

  Int compute_cnt(TypeId t, long len) {
    switch (t.kind) {
      case Kind::NAT: {
        if (len % 2 == 0) return 0;
        Int one = 1;
        return one << static_cast<unsigned long>((len - 1) / 2);
      }
      case Kind::NATNZ:
        return len == 1 ? Int(0) : cnt({Kind::NAT}, len);
      case Kind::Q: {
        if (len == 1) return 1;
        if (len < 5) return 0;
        if (len == 5) return 2;  // the pair +-1 (the magnitude-one fraction has one spelling)
        return 4 * cnt({Kind::QCF}, len - 3);
      }
      case Kind::QCF: {
        Int total = 0;
        for (long l = 1; l < len; l += 2) total += cnt({Kind::NAT}, l) * cnt({Kind::QLIST}, len - l);
        return total;
      }
      case Kind::QLIST:
        return (len == 1 ? Int(1) : Int(0)) + (len >= 2 ? cnt({Kind::QREST}, len - 1) : Int(0));
      case Kind::QREST: {
        Int total = cnt({Kind::NATNZ}, len - 1);
        for (long l = 1; l + 1 < len; l += 2)
          total += cnt({Kind::NAT}, l) * cnt({Kind::QREST}, len - 1 - l);
        return total;
      }
      case Kind::ELEM: {
        if (!t.w) {
          if (t.level == 0) return cnt({Kind::Q}, len);
          Int total = 0;
          for (long j = 0; j <= t.level && j + 1 < len; ++j) {
            TypeId payload = j == 0 ? TypeId{Kind::Q} : TypeId{Kind::XDATA, false, j};
            total += cnt(payload, len - j - 1);
          }
          return total;
        }
        if (t.level == 0) return cnt({Kind::ELEM, false, kany_level()}, len);
        Int total = 0;
        for (long sg = 0; sg <= t.level && sg + 1 < len; ++sg) {
          TypeId payload =
              sg == 0 ? TypeId{Kind::ELEM, true, 0} : TypeId{Kind::ZDATA, false, sg};
          total += cnt(payload, len - sg - 1);
        }
        return total;
      }
      case Kind::XDATA:
      case Kind::ZDATA: {
        if (len < 3) return 0;
        bool w = t.kind == Kind::ZDATA;
        // degree k: k leading coefficients as RF plus a nonzero last one
        Int total = cnt({Kind::RFNCQ, w, t.level - 1}, len - 2);
        for (int k = 1; k <= 3; ++k) total += cnt({Kind::RFTAIL, w, t.level - 1, k}, len - 2);
        return total;
      }
      case Kind::RFTAIL: {
        if (t.aux == 0) return cnt({Kind::RFNZ, t.w, t.level}, len);
        Int total = 0;
        for (long l = 1; l < len; ++l) {
          Int a = cnt({Kind::RF, t.w, t.level}, l);
          if (a == 0) continue;
          total += a * cnt({Kind::RFTAIL, t.w, t.level, t.aux - 1}, len - l);
        }
        return total;
      }
      case Kind::RF: {
        Int total = 0;
        for (long l = 1; l < len; ++l) {
          Int a = cnt({Kind::POLY, t.w, t.level}, l);
          if (a == 0) continue;
          total += a * cnt({Kind::DLIST, t.w, t.level}, len - l);
        }
        return total;
      }
      case Kind::RFNZ:
        return cnt({Kind::RF, t.w, t.level}, len) - (len == 2 ? 1 : 0);
      case Kind::RFNCQ: {
        Int total = cnt({Kind::RF, t.w, t.level}, len) - (len == 2 ? 1 : 0);
        if (len >= 3) total -= cnt({Kind::CNZ, t.w, t.level}, len - 3);
        return total;
      }
      case Kind::POLY:
        return (len == 1 ? Int(1) : Int(0)) +
               (len >= 2 ? cnt({Kind::REST, t.w, t.level}, len - 1) : Int(0));
      case Kind::REST:
        return cnt({Kind::CNZ, t.w, t.level}, len - 1) + dpoly_sum(t, len);
      case Kind::DPOLY:
        return dpoly_sum(t, len);
      case Kind::DLIST: {
        if (len == 1) return 1;
        Int total = 0;
        for (long l = 1; l + 1 < len; ++l) {
          Int a = cnt({Kind::DPOLY, t.w, t.level}, l);
          if (a == 0) continue;
          total += a * cnt({Kind::DLIST, t.w, t.level}, len - 1 - l);
        }
        return total;
      }
      case Kind::CNZ:
        return cnt(coef_type(t), len) - (len == zero_len(t.w, t.level) ? 1 : 0);
      case Kind::GSEQ:
        return gseq_count(len);
      default:
        throw std::logic_error("cnt: unknown kind");
    }
  }

  Int dpoly_sum(TypeId t, long len) {
    Int total = 0;
    TypeId c = coef_type(t);
    for (long l = 1; l + 1 < len; ++l) {
      Int a = cnt(c, l);
      if (a == 0) continue;
      total += a * cnt({Kind::REST, t.w, t.level}, len - 1 - l);
    }
    return total;
  }

  // ---- rank: structural parse producing (length, within-length rank) ----

  Parsed rank_parse(TypeId t, BitReader& rd) {
    switch (t.kind) {
      case Kind::NAT:
      case Kind::NATNZ: {
        Int n = rd.read_nat();
        long len = static_cast<long>(nat_code_length(n));
        Int w = n + 1;
        Int r = w - (Int(1) << static_cast<unsigned long>((len - 1) / 2));
        return {len, r};
      }
      case Kind::Q: {
        if (!rd.read()) return {1, Int(0)};
        Parsed cf = rank_parse({Kind::QCF}, rd);
        bool inv = rd.read();
        bool sign = rd.read();
        long len = 1 + cf.len + 2;
        if (cf.len == 2) return {len, Int(sign ? 1 : 0)};
        Int r = 4 * cf.rank + (inv ? 2 : 0) + (sign ? 1 : 0);
        return {len, r};
      }
      case Kind::QCF: {
        Parsed a = rank_parse({Kind::NAT}, rd);
        Parsed b = rank_parse({Kind::QLIST}, rd);
        long len = a.len + b.len;
        Int r = b.rank + a.rank * cnt({Kind::QLIST}, b.len);
        for (long l = 1; l < a.len; l += 2) r += cnt({Kind::NAT}, l) * cnt({Kind::QLIST}, len - l);
        return {len, r};
      }
      case Kind::QLIST: {
        if (!rd.read()) return {1, Int(0)};
        Parsed rest = rank_parse({Kind::QREST}, rd);
        return {1 + rest.len, rest.rank};
      }
      case Kind::QREST: {
        Parsed item = rank_parse({Kind::NAT}, rd);
        if (!rd.read()) return {item.len + 1, item.rank};
        Parsed rest = rank_parse({Kind::QREST}, rd);
        long len = item.len + 1 + rest.len;
        Int r = cnt({Kind::NATNZ}, len - 1);
        for (long l = 1; l < item.len; l += 2)
          r += cnt({Kind::NAT}, l) * cnt({Kind::QREST}, len - 1 - l);
        r += item.rank * cnt({Kind::QREST}, rest.len) + rest.rank;
        return {len, r};
      }
      case Kind::ELEM: {
        if (!t.w) {
          if (t.level == 0) return rank_parse({Kind::Q}, rd);
          long j = rd.read_unary();
          TypeId payload = j == 0 ? TypeId{Kind::Q} : TypeId{Kind::XDATA, false, j};
          Parsed p = rank_parse(payload, rd);
          long len = j + 1 + p.len;
          Int r = p.rank;
          for (long j2 = 0; j2 < j; ++j2) {
            TypeId p2 = j2 == 0 ? TypeId{Kind::Q} : TypeId{Kind::XDATA, false, j2};
            r += cnt(p2, len - j2 - 1);
          }
          return {len, r};
        }
        if (t.level == 0) return rank_parse({Kind::ELEM, false, kany_level()}, rd);
        long sg = rd.read_unary();
        TypeId payload = sg == 0 ? TypeId{Kind::ELEM, true, 0} : TypeId{Kind::ZDATA, false, sg};
        Parsed p = rank_parse(payload, rd);
        long len = sg + 1 + p.len;
        Int r = p.rank;
        for (long s2 = 0; s2 < sg; ++s2) {
          TypeId p2 = s2 == 0 ? TypeId{Kind::ELEM, true, 0} : TypeId{Kind::ZDATA, false, s2};
          r += cnt(p2, len - s2 - 1);
        }
        return {len, r};
      }
      case Kind::XDATA:
      case Kind::ZDATA: {
        bool w = t.kind == Kind::ZDATA;
        int k = rd.read_raw2();
        TypeId body = k == 0 ? TypeId{Kind::RFNCQ, w, t.level - 1}
                             : TypeId{Kind::RFTAIL, w, t.level - 1, k};
        Parsed p = rank_parse(body, rd);
        long len = 2 + p.len;
        Int r = p.rank;
        for (int k2 = 0; k2 < k; ++k2) {
          TypeId b2 = k2 == 0 ? TypeId{Kind::RFNCQ, w, t.level - 1}
                              : TypeId{Kind::RFTAIL, w, t.level - 1, k2};
          r += cnt(b2, len - 2);
        }
        return {len, r};
      }
      case Kind::RFTAIL: {
        if (t.aux == 0) return rank_parse({Kind::RFNZ, t.w, t.level}, rd);
        Parsed a = rank_parse({Kind::RF, t.w, t.level}, rd);
        Parsed b = rank_parse({Kind::RFTAIL, t.w, t.level, t.aux - 1}, rd);
        long len = a.len + b.len;
        Int r = b.rank + a.rank * cnt({Kind::RFTAIL, t.w, t.level, t.aux - 1}, b.len);
        for (long l = 1; l < a.len; ++l)
          r += cnt({Kind::RF, t.w, t.level}, l) *
               cnt({Kind::RFTAIL, t.w, t.level, t.aux - 1}, len - l);
        return {len, r};
      }
      case Kind::RF:
      case Kind::RFNZ: {
        Parsed a = rank_parse({Kind::POLY, t.w, t.level}, rd);
        Parsed b = rank_parse({Kind::DLIST, t.w, t.level}, rd);
        long len = a.len + b.len;
        Int r = b.rank + a.rank * cnt({Kind::DLIST, t.w, t.level}, b.len);
        for (long l = 1; l < a.len; ++l)
          r += cnt({Kind::POLY, t.w, t.level}, l) * cnt({Kind::DLIST, t.w, t.level}, len - l);
        return {len, r};
      }
      case Kind::RFNCQ: {
        Parsed rf = rank_parse({Kind::RF, t.w, t.level}, rd);
        Int base = rfncq_const_base(t, rf.len);
        if (rf.rank >= base) rf.rank -= cnt({Kind::CNZ, t.w, t.level}, rf.len - 3);
        return rf;
      }
      case Kind::POLY: {
        if (!rd.read()) return {1, Int(0)};
        Parsed rest = rank_parse({Kind::REST, t.w, t.level}, rd);
        return {1 + rest.len, rest.rank};
      }
      case Kind::REST: {
        Parsed c = rank_parse(coef_type(t), rd);
        if (!rd.read()) return {c.len + 1, c.rank};
        Parsed rest = rank_parse({Kind::REST, t.w, t.level}, rd);
        long len = c.len + 1 + rest.len;
        Int r = cnt({Kind::CNZ, t.w, t.level}, len - 1);
        TypeId ct = coef_type(t);
        for (long l = 1; l < c.len; ++l)
          r += cnt(ct, l) * cnt({Kind::REST, t.w, t.level}, len - 1 - l);
        r += c.rank * cnt({Kind::REST, t.w, t.level}, rest.len) + rest.rank;
        return {len, r};
      }
      case Kind::DPOLY: {
        Parsed c = rank_parse(coef_type(t), rd);
        if (!rd.read()) throw std::logic_error("rank_parse: constant partial quotient");
        Parsed rest = rank_parse({Kind::REST, t.w, t.level}, rd);
        long len = c.len + 1 + rest.len;
        Int r = 0;
        TypeId ct = coef_type(t);
        for (long l = 1; l < c.len; ++l)
          r += cnt(ct, l) * cnt({Kind::REST, t.w, t.level}, len - 1 - l);
        r += c.rank * cnt({Kind::REST, t.w, t.level}, rest.len) + rest.rank;
        return {len, r};
      }
      case Kind::DLIST: {
        if (!rd.read()) return {1, Int(0)};
        Parsed d = rank_parse({Kind::DPOLY, t.w, t.level}, rd);
        Parsed rest = rank_parse({Kind::DLIST, t.w, t.level}, rd);
        long len = 1 + d.len + rest.len;
        Int r = rest.rank + d.rank * cnt({Kind::DLIST, t.w, t.level}, rest.len);
        for (long l = 1; l < d.len; ++l)
          r += cnt({Kind::DPOLY, t.w, t.level}, l) * cnt({Kind::DLIST, t.w, t.level}, len - 1 - l);
        return {len, r};
      }
      case Kind::CNZ:
        return rank_parse(coef_type(t), rd);
      default:
        throw std::logic_error("rank_parse: unknown kind");
    }
  }

  /// First rank of the constant block inside the RF length class: all
  /// strings with a shorter polynomial part come first.
  Int rfncq_const_base(TypeId t, long len) {
    Int base = 0;
    for (long lp = 1; lp < len - 1; ++lp)
      base += cnt({Kind::POLY, t.w, t.level}, lp) * cnt({Kind::DLIST, t.w, t.level}, len - lp);
    return base;
  }

  // ---- unrank: emit the string of the given length and rank ----

  void unrank_emit(TypeId t, long len, Int r, BitVec& out) {
    switch (t.kind) {
      case Kind::NAT:
      case Kind::NATNZ: {
        Int n = (Int(1) << static_cast<unsigned long>((len - 1) / 2)) - 1 + r;
        out.append_nat(n);
        return;
      }
      case Kind::Q: {
        if (len == 1) {
          out.push(false);
          return;
        }
        out.push(true);
        if (len == 5) {
          out.push(true);   // CF [1]
          out.push(false);
          out.push(true);   // magnitude taken directly
          out.push(r == 1);
          return;
        }
        Int rcf = r / 4;
        long rem = Int(r % 4).get_si();
        unrank_emit({Kind::QCF}, len - 3, rcf, out);
        out.push(rem >= 2);
        out.push(rem % 2 == 1);
        return;
      }
      case Kind::QCF: {
        for (long l = 1; l < len; l += 2) {
          Int ca = cnt({Kind::NAT}, l);
          Int cb = cnt({Kind::QLIST}, len - l);
          if (cb == 0 || ca == 0) continue;
          Int block = ca * cb;
          if (r < block) {
            Int ra = r / cb, rb = r % cb;
            unrank_emit({Kind::NAT}, l, ra, out);
            unrank_emit({Kind::QLIST}, len - l, rb, out);
            return;
          }
          r -= block;
        }
        throw std::logic_error("unrank: QCF rank out of range");
      }
      case Kind::QLIST: {
        if (len == 1) {
          out.push(false);
          return;
        }
        out.push(true);
        unrank_emit({Kind::QREST}, len - 1, std::move(r), out);
        return;
      }
      case Kind::QREST: {
        Int term = cnt({Kind::NATNZ}, len - 1);
        if (r < term) {
          unrank_emit({Kind::NATNZ}, len - 1, std::move(r), out);
          out.push(false);
          return;
        }
        r -= term;
        for (long l = 1; l + 1 < len; l += 2) {
          Int ca = cnt({Kind::NAT}, l);
          Int cb = cnt({Kind::QREST}, len - 1 - l);
          if (ca == 0 || cb == 0) continue;
          Int block = ca * cb;
          if (r < block) {
            Int ra = r / cb, rb = r % cb;
            unrank_emit({Kind::NAT}, l, ra, out);
            out.push(true);
            unrank_emit({Kind::QREST}, len - 1 - l, rb, out);
            return;
          }
          r -= block;
        }
        throw std::logic_error("unrank: QREST rank out of range");
      }
      case Kind::ELEM: {
        if (!t.w) {
          if (t.level == 0) {
            unrank_emit({Kind::Q}, len, std::move(r), out);
            return;
          }
          for (long j = 0; (t.level < 0 || j <= t.level) && j + 1 < len; ++j) {
            TypeId payload = j == 0 ? TypeId{Kind::Q} : TypeId{Kind::XDATA, false, j};
            Int c = cnt(payload, len - j - 1);
            if (r < c) {
              out.append_unary(j);
              unrank_emit(payload, len - j - 1, std::move(r), out);
              return;
            }
            r -= c;
          }
          throw std::logic_error("unrank: ELEM rank out of range");
        }
        if (t.level == 0) {
          unrank_emit({Kind::ELEM, false, kany_level()}, len, std::move(r), out);
          return;
        }
        for (long sg = 0; sg <= t.level && sg + 1 < len; ++sg) {
          TypeId payload =
              sg == 0 ? TypeId{Kind::ELEM, true, 0} : TypeId{Kind::ZDATA, false, sg};
          Int c = cnt(payload, len - sg - 1);
          if (r < c) {
            out.append_unary(sg);
            unrank_emit(payload, len - sg - 1, std::move(r), out);
            return;
          }
          r -= c;
        }
        throw std::logic_error("unrank: ELEM rank out of range");
      }
      case Kind::XDATA:
      case Kind::ZDATA: {
        bool w = t.kind == Kind::ZDATA;
        for (int k = 0; k <= 3; ++k) {
          TypeId body = k == 0 ? TypeId{Kind::RFNCQ, w, t.level - 1}
                               : TypeId{Kind::RFTAIL, w, t.level - 1, k};
          Int c = cnt(body, len - 2);
          if (r < c) {
            out.append_raw2(k);
            unrank_emit(body, len - 2, std::move(r), out);
            return;
          }
          r -= c;
        }
        throw std::logic_error("unrank: coefficient block rank out of range");
      }
      case Kind::RFTAIL: {
        if (t.aux == 0) {
          unrank_emit({Kind::RFNZ, t.w, t.level}, len, std::move(r), out);
          return;
        }
        TypeId tail{Kind::RFTAIL, t.w, t.level, t.aux - 1};
        for (long l = 1; l < len; ++l) {
          Int ca = cnt({Kind::RF, t.w, t.level}, l);
          if (ca == 0) continue;
          Int cb = cnt(tail, len - l);
          if (cb == 0) continue;
          Int block = ca * cb;
          if (r < block) {
            Int ra = r / cb, rb = r % cb;
            unrank_emit({Kind::RF, t.w, t.level}, l, ra, out);
            unrank_emit(tail, len - l, rb, out);
            return;
          }
          r -= block;
        }
        throw std::logic_error("unrank: RF tuple rank out of range");
      }
      case Kind::RF:
      case Kind::RFNZ: {
        for (long l = 1; l < len; ++l) {
          Int ca = cnt({Kind::POLY, t.w, t.level}, l);
          if (ca == 0) continue;
          Int cb = cnt({Kind::DLIST, t.w, t.level}, len - l);
          if (cb == 0) continue;
          Int block = ca * cb;
          if (r < block) {
            Int ra = r / cb, rb = r % cb;
            unrank_emit({Kind::POLY, t.w, t.level}, l, ra, out);
            unrank_emit({Kind::DLIST, t.w, t.level}, len - l, rb, out);
            return;
          }
          r -= block;
        }
        throw std::logic_error("unrank: RF rank out of range");
      }
      case Kind::RFNCQ: {
        Int base = rfncq_const_base(t, len);
        if (r >= base) r += cnt({Kind::CNZ, t.w, t.level}, len - 3);
        unrank_emit({Kind::RF, t.w, t.level}, len, std::move(r), out);
        return;
      }
      case Kind::POLY: {
        if (len == 1) {
          out.push(false);
          return;
        }
        out.push(true);
        unrank_emit({Kind::REST, t.w, t.level}, len - 1, std::move(r), out);
        return;
      }
      case Kind::REST: {
        Int term = cnt({Kind::CNZ, t.w, t.level}, len - 1);
        if (r < term) {
          unrank_emit({Kind::CNZ, t.w, t.level}, len - 1, std::move(r), out);
          out.push(false);
          return;
        }
        r -= term;
        emit_coef_rest(t, len, std::move(r), out);
        return;
      }
      case Kind::DPOLY:
        emit_coef_rest(t, len, std::move(r), out);
        return;
      case Kind::DLIST: {
        if (len == 1) {
          out.push(false);
          return;
        }
        out.push(true);
        for (long l = 1; l + 1 < len; ++l) {
          Int ca = cnt({Kind::DPOLY, t.w, t.level}, l);
          if (ca == 0) continue;
          Int cb = cnt({Kind::DLIST, t.w, t.level}, len - 1 - l);
          if (cb == 0) continue;
          Int block = ca * cb;
          if (r < block) {
            Int ra = r / cb, rb = r % cb;
            unrank_emit({Kind::DPOLY, t.w, t.level}, l, ra, out);
            unrank_emit({Kind::DLIST, t.w, t.level}, len - 1 - l, rb, out);
            return;
          }
          r -= block;
        }
        throw std::logic_error("unrank: DLIST rank out of range");
      }
      case Kind::CNZ:
        unrank_emit(coef_type(t), len, std::move(r), out);
        return;
      default:
        throw std::logic_error("unrank: unknown kind");
    }
  }

  void emit_coef_rest(TypeId t, long len, Int r, BitVec& out) {
    TypeId ct = coef_type(t);
    for (long l = 1; l + 1 < len; ++l) {
      Int ca = cnt(ct, l);
      if (ca == 0) continue;
      Int cb = cnt({Kind::REST, t.w, t.level}, len - 1 - l);
      if (cb == 0) continue;
      Int block = ca * cb;
      if (r < block) {
        Int ra = r / cb, rb = r % cb;
        unrank_emit(ct, l, ra, out);
        out.push(true);
        unrank_emit({Kind::REST, t.w, t.level}, len - 1 - l, rb, out);
        return;
      }
      r -= block;
    }
    throw std::logic_error("unrank: coefficient list rank out of range");
  }

  // ---- sequential enumeration over realized columns ----

  /// Payload count of a column at one length, with the level pre-clamped so
  /// huge columns share stabilized table entries.
  Int col_payload_count(const Int& column, long plen) {
    if (plen <= 0) return 0;
    if (column == 0) return cnt({Kind::Q}, plen);
    if (column % 2 == 0) {
      Int m = column / 2;
      long lv = m > plen ? plen : m.get_si();
      return cnt({Kind::XDATA, false, lv}, plen);
    }
    Int s = (column + 1) / 2;
    long lv = s > plen ? plen : s.get_si();
    return cnt({Kind::ZDATA, false, lv}, plen);
  }

  /// One past the largest realized column in bounded mode.
  Int realized_col_cap() const {
    Int xcap = 2 * Int(nbound_) + 1;
    Int zcap = Int(nbound_) * (nbound_ - 1);  // = 2 * pair count
    return xcap > zcap ? xcap : zcap;
  }

  /// Sum of payload counts over realized columns in [a, b) at total serial
  /// length `total` (all these columns share one NAT length `natlen`).
  Int col_range_sum(Int a, Int b, long natlen, long total) {
    long plen = total - natlen;
    if (plen <= 0) return 0;
    Int sum = 0;
    if (nbound_ >= 0) {
      // few realized columns; walk them directly
      Int cap = realized_col_cap();
      if (b > cap) b = cap;
      for (; a < b; ++a)
        if (column_realized(a.get_si())) sum += col_payload_count(a, plen);
      return sum;
    }
    // unbounded mode: counts depend on the column only until the level
    // clamp saturates, after that every even column counts like X at the
    // clamp and every odd one like Z
    Int stable_from = 2 * Int(plen);
    while (a < b && a < stable_from) {
      sum += col_payload_count(a, plen);
      ++a;
    }
    if (a >= b) return sum;
    Int evens = (b + 1) / 2 - (a + 1) / 2;
    Int odds = b / 2 - a / 2;
    Int sx = cnt({Kind::XDATA, false, plen}, plen);
    Int sz = cnt({Kind::ZDATA, false, plen}, plen);
    return sum + evens * sx + odds * sz;
  }

  static std::pair<Int, Int> nat_group(long k) {
    // columns whose NAT code has length 2k+1
    Int lo = (Int(1) << static_cast<unsigned long>(k)) - 1;
    Int hi = (Int(1) << static_cast<unsigned long>(k + 1)) - 1;
    return {lo, hi};
  }

  Int gseq_count(long total) {
    Int sum = 0;
    for (long k = 0; 2 * k + 1 < total; ++k) {
      auto [lo, hi] = nat_group(k);
      sum += col_range_sum(lo, hi, 2 * k + 1, total);
    }
    return sum;
  }

  Int seq_count_locked(long len) { return cnt({Kind::GSEQ}, len); }

  /// Sum over realized columns strictly before `column` in the sequential
  /// order (NAT length, then column value) at total serial length `total`.
  Int seq_prior(long column, long total) {
    long natlen = static_cast<long>(nat_code_length(Int(column)));
    Int sum = 0;
    for (long k = 0; 2 * k + 1 < natlen; ++k) {
      auto [lo, hi] = nat_group(k);
      sum += col_range_sum(lo, hi, 2 * k + 1, total);
    }
    auto [lo, hi] = nat_group((natlen - 1) / 2);
    sum += col_range_sum(lo, Int(column), natlen, total);
    return sum;
  }

  std::pair<long, BitVec> seq_unrank_in(long total, Int r) {
    for (long k = 0; 2 * k + 1 < total; ++k) {
      long natlen = 2 * k + 1;
      long plen = total - natlen;
      auto [lo, hi] = nat_group(k);
      Int group = col_range_sum(lo, hi, natlen, total);
      if (r >= group) {
        r -= group;
        continue;
      }
      if (nbound_ >= 0) {
        Int cap = realized_col_cap();
        if (hi > cap) hi = cap;
        for (Int c = lo; c < hi; ++c) {
          if (!column_realized(c.get_si())) continue;
          Int cc = col_payload_count(c, plen);
          if (r < cc) return {c.get_si(), payload_unrank_at(c.get_si(), plen, r)};
          r -= cc;
        }
        throw std::logic_error("seq_unrank: group accounting mismatch");
      }
      // walk the column-dependent region, then jump the stabilized region
      // two columns (one X count plus one Z count) at a time
      Int c = lo;
      Int stable_from = 2 * Int(plen);
      while (c < hi && c < stable_from) {
        Int cc = col_payload_count(c, plen);
        if (r < cc) return {c.get_si(), payload_unrank_at(c.get_si(), plen, r)};
        r -= cc;
        ++c;
      }
      Int sx = cnt({Kind::XDATA, false, plen}, plen);
      Int sz = cnt({Kind::ZDATA, false, plen}, plen);
      Int pair = sx + sz;
      if (pair > 0) {
        Int skip = r / pair;
        c += 2 * skip;
        r -= skip * pair;
      }
      for (; c < hi; ++c) {
        Int cc = col_payload_count(c, plen);
        if (r < cc) {
          if (!c.fits_slong_p()) throw std::overflow_error("seq_unrank: column too large");
          return {c.get_si(), payload_unrank_at(c.get_si(), plen, r)};
        }
        r -= cc;
      }
      throw std::logic_error("seq_unrank: group accounting mismatch");
    }
    throw std::logic_error("seq_unrank: length accounting mismatch");
  }

  BitVec payload_unrank_at(long column, long plen, const Int& r) {
    BitVec out;
    Int rr = r;
    unrank_emit(payload_type(column), plen, std::move(rr), out);
    return out;
  }
};

}  // namespace towerfield
