#pragma once

#include <json.hpp>

#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "towerfield/coding.hpp"
#include "towerfield/errors.hpp"
#include "towerfield/ranking.hpp"
#include "towerfield/serialize.hpp"
#include "towerfield/tower.hpp"

namespace towerfield {

/// Codes are naturals; they can be astronomically large (a code packs a
/// column and an in-column rank), so they are exact big integers throughout.
using Code = Int;

inline Int pi(const Int& a, const Int& b) { return pair_code(a, b); }
inline std::pair<Int, Int> pi_inv(const Int& n) { return pair_split(n); }

/// The part of a presentation a decoder may touch: constants, ring
/// operations on codes, and the code domain.  Everything else (direct
/// encode/decode, generator maps) is deliberately absent so scrambled
/// copies can stand in for honest presentations.
class OracleSurface {
 public:
  virtual ~OracleSurface() = default;

  virtual Code zero() const = 0;
  virtual Code one() const = 0;
  virtual Code add(const Code& a, const Code& b) const = 0;
  virtual Code sub(const Code& a, const Code& b) const = 0;
  virtual Code mul(const Code& a, const Code& b) const = 0;
  virtual bool in_domain(const Code& c) const = 0;
  virtual std::string description() const = 0;

  /// Least domain code strictly greater than `after` (pass -1 for the
  /// least domain code).  Default: linear scan with a stall cap.
  virtual Code next_domain_code(const Code& after) const {
    Code c = after + 1;
    for (long miss = 0; miss < (1L << 22); ++miss, ++c)
      if (in_domain(c)) return c;
    throw BudgetExceeded("next_domain_code: domain scan stalled");
  }
};

enum class PresentationMode { ColumnFaithful, Sequential };

/// An omega-presentation of a tower field.
///
/// Column-faithful mode: code = pi(column, rank), rank being the element's
/// position in its column's length-major enumeration; in finite-graph mode
/// the domain is the decidable set of codes over realized columns.
/// Sequential mode: code = global rank of the element's tagged serial; the
/// domain is all of omega even for finite graphs.
///
/// Codes are a fixed function of the graph, never of query history.
class FieldPresentation : public OracleSurface,
                          public std::enable_shared_from_this<FieldPresentation> {
 public:
  static std::shared_ptr<FieldPresentation> make(std::shared_ptr<const Tower> tower,
                                                 PresentationMode mode) {
    return std::shared_ptr<FieldPresentation>(new FieldPresentation(std::move(tower), mode));
  }

  PresentationMode mode() const { return mode_; }
  const std::shared_ptr<const Tower>& tower() const { return tower_; }

  Code encode(const TowerElem& e) const {
    long col = column_of(e.support());
    if (!census_->column_realized(col))
      throw CodeOutOfDomain("encode: column " + std::to_string(col) + " not realized");
    BitVec bits = serialize_element(e);
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = encode_cache_.find({col, bits});
      if (it != encode_cache_.end()) return it->second;
    }
    Code c = mode_ == PresentationMode::ColumnFaithful
                 ? pair_code(Int(col), census_->payload_rank(col, bits))
                 : census_->seq_rank(col, bits);
    std::lock_guard<std::mutex> lk(mu_);
    if (encode_cache_.size() < kCacheCap)
      encode_cache_.emplace(std::make_pair(col, std::move(bits)), c);
    return c;
  }

  TowerElem decode(const Code& c) const {
    if (!in_domain(c)) throw CodeOutOfDomain("decode: code not in domain");
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = decode_cache_.find(c);
      if (it != decode_cache_.end()) return it->second;
    }
    long col;
    BitVec bits;
    if (mode_ == PresentationMode::ColumnFaithful) {
      auto [ci, rank] = pair_split(c);
      if (!ci.fits_slong_p()) throw std::overflow_error("decode: column too large");
      col = ci.get_si();
      bits = census_->payload_unrank(col, rank);
    } else {
      auto [ci, bv] = census_->seq_unrank(c);
      col = ci;
      bits = std::move(bv);
    }
    BitReader rd(bits);
    TowerElem e = parse_element(rd, tower_, col);
    if (!rd.done()) throw std::logic_error("decode: trailing bits");
    std::lock_guard<std::mutex> lk(mu_);
    if (decode_cache_.size() < kCacheCap)
      decode_cache_.emplace(c, e);
    return e;
  }

  /// rank-th canonical element of a column, independent of mode.
  TowerElem enumerate_column(long column, const Int& rank) const {
    if (!census_->column_realized(column))
      throw ColumnNotRealized("column " + std::to_string(column) + " not realized");
    BitVec bits = census_->payload_unrank(column, rank);
    BitReader rd(bits);
    return parse_element(rd, tower_, column);
  }

  // -- oracle surface --

  Code zero() const override { return zero_; }
  Code one() const override { return one_; }
  Code add(const Code& a, const Code& b) const override { return op(a, b, '+'); }
  Code sub(const Code& a, const Code& b) const override { return op(a, b, '-'); }
  Code mul(const Code& a, const Code& b) const override { return op(a, b, '*'); }

  bool in_domain(const Code& c) const override {
    if (c < 0) return false;
    if (mode_ == PresentationMode::Sequential) return true;
    auto [col, rank] = pair_split(c);
    return col.fits_slong_p() && census_->column_realized(col.get_si());
  }

  std::string description() const override {
    std::string m = mode_ == PresentationMode::ColumnFaithful ? "column-faithful" : "sequential";
    return m + " presentation of " + tower_->graph().description();
  }

  Code next_domain_code(const Code& after) const override {
    if (mode_ == PresentationMode::Sequential) return after < 0 ? Code(0) : Code(after + 1);
    Int best = -1;
    for (long col = 0;; ++col) {
      Int base = pair_code(Int(col), Int(0));
      if (best >= 0 && base > after && base >= best) break;
      if (!census_->column_realized(col)) continue;
      Int cand;
      if (base > after) {
        cand = base;
      } else {
        // least rank whose code exceeds `after`; codes rise strictly in rank
        Int lo = 0, hi = 1;
        while (pair_code(Int(col), hi) <= after) hi *= 2;
        while (lo < hi) {
          Int mid = (lo + hi) / 2;
          if (pair_code(Int(col), mid) > after)
            hi = mid;
          else
            lo = mid + 1;
        }
        cand = pair_code(Int(col), lo);
      }
      if (best < 0 || cand < best) best = cand;
    }
    return best;
  }

  // -- vertex coding --

  /// Code of the i-th vertex generator; never consults the edge oracle.
  Code mu(long i) const { return encode(tower_->u(i)); }

  /// Inverts mu where possible; decides range membership.
  std::optional<long> mu_inv(const Code& c) const {
    if (!in_domain(c)) return std::nullopt;
    long col;
    if (mode_ == PresentationMode::ColumnFaithful) {
      auto [ci, rank] = pair_split(c);
      if (!ci.fits_slong_p()) return std::nullopt;
      col = ci.get_si();
    } else {
      col = census_->seq_unrank(c).first;
    }
    if (col < 2 || col % 2 != 0) return std::nullopt;
    long i = col / 2 - 1;
    return mu(i) == c ? std::optional<long>(i) : std::nullopt;
  }

 private:
  FieldPresentation(std::shared_ptr<const Tower> tower, PresentationMode mode)
      : mode_(mode),
        tower_(std::move(tower)),
        census_(GrammarCensus::for_bound(tower_->graph().vertex_count())) {
    zero_ = encode(TowerElem(0));
    one_ = encode(TowerElem(1));
  }

  Code op(const Code& a, const Code& b, char which) const {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = op_cache_.find({a, which, b});
      if (it != op_cache_.end()) return it->second;
    }
    TowerElem x = decode(a);
    TowerElem y = decode(b);
    TowerElem r = which == '+' ? x + y : which == '-' ? x - y : x * y;
    Code c = encode(r);
    std::lock_guard<std::mutex> lk(mu_);
    if (op_cache_.size() < kCacheCap)
      op_cache_.emplace(std::make_tuple(a, which, b), c);
    return c;
  }

  // caps keep long decoding scans from growing the memo tables unboundedly
  static constexpr size_t kCacheCap = 1u << 18;

  PresentationMode mode_;
  std::shared_ptr<const Tower> tower_;
  std::shared_ptr<GrammarCensus> census_;
  Code zero_, one_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<long, BitVec>, Code> encode_cache_;
  mutable std::map<Code, TowerElem> decode_cache_;
  mutable std::map<std::tuple<Code, char, Code>, Code> op_cache_;
};

/// Multiplicative inverse through the field signature only: walk the domain
/// in code order until mul gives one.
inline Code inv_by_search(const OracleSurface& f, const Code& c, long budget = 1000000) {
  if (!f.in_domain(c)) throw CodeOutOfDomain("inv_by_search: code not in domain");
  if (c == f.zero()) throw ZeroInverse("inv_by_search: zero has no inverse");
  Code one = f.one();
  Code b = f.next_domain_code(Int(-1));
  for (long step = 0; step < budget; ++step) {
    if (f.mul(c, b) == one) return b;
    b = f.next_domain_code(b);
  }
  throw BudgetExceeded("inv_by_search: budget exhausted");
}

/// A computable bijection of code space: a finite list of disjoint swaps,
/// or a named rule.  All supported rules are involutions, but apply and
/// inverse_apply stay distinct names for clarity at call sites.
class Permutation {
 public:
  static Permutation identity() {
    Permutation p;
    p.desc_ = "identity";
    return p;
  }

  static Permutation swaps(const std::vector<std::pair<Code, Code>>& pairs) {
    Permutation p;
    for (const auto& [a, b] : pairs) {
      if (a < 0 || b < 0) throw InputFormatError("permutation: negative code");
      if (p.map_.count(a) || (a != b && p.map_.count(b)))
        throw InputFormatError("permutation: swaps not disjoint");
      p.map_[a] = b;
      p.map_[b] = a;
    }
    std::ostringstream d;
    d << "swaps(" << pairs.size() << ")";
    p.desc_ = d.str();
    return p;
  }

  /// "identity" or "adjacent-swap" (2k <-> 2k+1).
  static Permutation named(const std::string& rule) {
    if (rule == "identity") return identity();
    if (rule == "adjacent-swap") {
      Permutation p;
      p.adjacent_ = true;
      p.desc_ = "adjacent-swap";
      return p;
    }
    throw InputFormatError("unknown permutation rule: " + rule);
  }

  /// {"type":"named","rule":...} or {"type":"swaps","swaps":[[a,b],...]}
  /// with codes as JSON numbers or decimal strings (for big codes).
  static Permutation from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type"))
      throw InputFormatError("permutation json: expected object with \"type\"");
    std::string type = j.at("type").get<std::string>();
    if (type == "named") return named(j.at("rule").get<std::string>());
    if (type != "swaps") throw InputFormatError("permutation json: unknown type " + type);
    std::vector<std::pair<Code, Code>> pairs;
    for (const auto& entry : j.at("swaps")) {
      if (!entry.is_array() || entry.size() != 2)
        throw InputFormatError("permutation json: swap entries must be pairs");
      pairs.emplace_back(json_code(entry[0]), json_code(entry[1]));
    }
    return swaps(pairs);
  }

  Code apply(const Code& c) const {
    if (adjacent_) return c % 2 == 0 ? Code(c + 1) : Code(c - 1);
    auto it = map_.find(c);
    return it == map_.end() ? c : it->second;
  }

  Code inverse_apply(const Code& c) const { return apply(c); }

  /// Largest code the permutation moves, or -1 for rule-based ones.
  Code finite_support_end() const {
    if (adjacent_) return -1;
    return map_.empty() ? Code(0) : Code(map_.rbegin()->first + 1);
  }

  bool is_finite_support() const { return !adjacent_; }
  const std::string& description() const { return desc_; }

 private:
  static Code json_code(const nlohmann::json& v) {
    try {
      if (v.is_string()) return Code(v.get<std::string>());
      if (v.is_number_unsigned()) return Code(static_cast<unsigned long>(v.get<uint64_t>()));
      if (v.is_number_integer()) return Code(static_cast<long>(v.get<int64_t>()));
    } catch (const std::invalid_argument&) {
    }
    throw InputFormatError("permutation json: codes must be naturals or decimal strings");
  }

  std::map<Code, Code> map_;
  bool adjacent_ = false;
  std::string desc_;
};

/// Isomorphic copy with every code pushed through a permutation: ops are
/// conjugated, and only the oracle surface shows.
class ScrambledSurface : public OracleSurface {
 public:
  ScrambledSurface(std::shared_ptr<const OracleSurface> base, Permutation perm)
      : base_(std::move(base)), perm_(std::move(perm)) {}

  Code zero() const override { return out(base_->zero()); }
  Code one() const override { return out(base_->one()); }
  Code add(const Code& a, const Code& b) const override {
    return out(base_->add(in(a), in(b)));
  }
  Code sub(const Code& a, const Code& b) const override {
    return out(base_->sub(in(a), in(b)));
  }
  Code mul(const Code& a, const Code& b) const override {
    return out(base_->mul(in(a), in(b)));
  }
  bool in_domain(const Code& c) const override {
    return c >= 0 && base_->in_domain(perm_.inverse_apply(c));
  }
  std::string description() const override {
    return base_->description() + "; scrambled by " + perm_.description();
  }
  Code next_domain_code(const Code& after) const override {
    if (perm_.is_finite_support()) {
      // inside the support walk code by code; beyond it the domain is the
      // base domain unchanged
      Code end = perm_.finite_support_end();
      Code c = after + 1;
      for (; c < end; ++c)
        if (in_domain(c)) return c;
      Code from = after < end - 1 ? Code(end - 1) : after;
      Code nxt = base_->next_domain_code(from);
      while (!in_domain(nxt)) nxt = base_->next_domain_code(nxt);
      return nxt;
    }
    return OracleSurface::next_domain_code(after);
  }

 private:
  Code in(const Code& c) const {
    Code b = perm_.inverse_apply(c);
    check_preserves(c, b);
    return b;
  }
  Code out(const Code& c) const {
    Code b = perm_.apply(c);
    check_preserves(c, b);
    return b;
  }
  void check_preserves(const Code& a, const Code& b) const {
    // a permutation must carry domain to domain; swap lists are validated
    // up front, rule-based permutations on every use
    if (base_->in_domain(a) != base_->in_domain(b))
      throw InputFormatError("permutation does not preserve the code domain");
  }

  std::shared_ptr<const OracleSurface> base_;
  Permutation perm_;
};

/// Conjugate a presentation by a permutation.  Swap lists are validated
/// against the domain up front; rule-based permutations are validated
/// lazily on every operation.
inline std::shared_ptr<const OracleSurface> scramble(std::shared_ptr<const OracleSurface> base,
                                                     const Permutation& perm) {
  if (perm.is_finite_support()) {
    Code end = perm.finite_support_end();
    for (Code c = 0; c < end; ++c) {
      if (base->in_domain(c) != base->in_domain(perm.apply(c)))
        throw InputFormatError("permutation does not preserve the code domain");
    }
  }
  return std::make_shared<ScrambledSurface>(std::move(base), perm);
}

/// Line-oriented dump of a surface's behavior on all domain codes below a
/// bound: header, constants, then one line per (a, op, b).
inline void dump_presentation(const OracleSurface& f, const Code& bound, std::ostream& os) {
  os << "# towerfield presentation dump\n";
  os << "# surface: " << f.description() << "\n";
  os << "# serialization: " << kSerialFormatVersion << "\n";
  os << "# bound: " << bound << "\n";
  os << "zero = " << f.zero() << "\n";
  os << "one = " << f.one() << "\n";
  std::vector<Code> codes;
  for (Code c = f.next_domain_code(Int(-1)); c < bound; c = f.next_domain_code(c))
    codes.push_back(c);
  for (const Code& a : codes)
    for (const Code& b : codes) {
      os << a << " + " << b << " = " << f.add(a, b) << "\n";
      os << a << " - " << b << " = " << f.sub(a, b) << "\n";
      os << a << " * " << b << " = " << f.mul(a, b) << "\n";
    }
}

/// Surface backed by a dump: answers exactly the recorded queries and
/// refuses anything beyond the table.
class ReplaySurface : public OracleSurface {
 public:
  explicit ReplaySurface(std::istream& is) {
    std::string line;
    bool have_zero = false, have_one = false;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        if (line.rfind("# surface: ", 0) == 0) desc_ = line.substr(11);
        continue;
      }
      std::istringstream ls(line);
      std::string tok1, tok2;
      ls >> tok1 >> tok2;
      if (tok2 == "=") {
        std::string val;
        ls >> val;
        if (tok1 == "zero") {
          zero_ = parse_code(val);
          have_zero = true;
        } else if (tok1 == "one") {
          one_ = parse_code(val);
          have_one = true;
        } else {
          throw InputFormatError("replay: unknown constant " + tok1);
        }
        continue;
      }
      std::string opstr, bstr, eq, cstr;
      opstr = tok2;
      ls >> bstr >> eq >> cstr;
      if (eq != "=" || (opstr != "+" && opstr != "-" && opstr != "*"))
        throw InputFormatError("replay: malformed line: " + line);
      Code a = parse_code(tok1), b = parse_code(bstr), c = parse_code(cstr);
      table_[{a, opstr[0], b}] = c;
      domain_.insert(a);
      domain_.insert(b);
    }
    if (!have_zero || !have_one) throw InputFormatError("replay: missing constants");
  }

  Code zero() const override { return zero_; }
  Code one() const override { return one_; }
  Code add(const Code& a, const Code& b) const override { return look(a, '+', b); }
  Code sub(const Code& a, const Code& b) const override { return look(a, '-', b); }
  Code mul(const Code& a, const Code& b) const override { return look(a, '*', b); }
  bool in_domain(const Code& c) const override { return domain_.count(c) != 0; }
  std::string description() const override { return "replay of: " + desc_; }
  Code next_domain_code(const Code& after) const override {
    auto it = domain_.upper_bound(after);
    if (it == domain_.end()) throw CodeOutOfDomain("replay: walked past the table");
    return *it;
  }

 private:
  static Code parse_code(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw InputFormatError("replay: bad code literal " + s);
    return Code(s);
  }

  Code look(const Code& a, char op, const Code& b) const {
    auto it = table_.find({a, op, b});
    if (it == table_.end()) throw CodeOutOfDomain("replay: query beyond the table");
    return it->second;
  }

  Code zero_, one_;
  std::string desc_;
  std::set<Code> domain_;
  std::map<std::tuple<Code, char, Code>, Code> table_;
};

}  // namespace towerfield
