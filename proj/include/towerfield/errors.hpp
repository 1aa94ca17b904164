#pragma once

#include <stdexcept>
#include <string>

namespace towerfield {

/// Base for all library-specific errors.  Plain std::domain_error /
/// std::invalid_argument are reserved for low-level arithmetic misuse
/// (division by zero in Rat/RatFn, malformed constructor input).
struct TowerfieldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested vertex is outside a finite graph's vertex range.
struct VertexOutOfRange : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// Multiplicative inverse of the zero tower element.
struct DivisionByZero : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// A nontrivial gcd with a level's minimal polynomial appeared during
/// inversion.  The minimal polynomials are irreducible over their base
/// fields, so this always signals an implementation bug, never bad input.
struct InternalReducibility : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// Code whose column is not realized (finite mode) or malformed.
struct CodeOutOfDomain : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// enumerate_column called on an unrealized column in finite mode.
struct ColumnNotRealized : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// inv_by_search called on the zero code.
struct ZeroInverse : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// A bounded search ran out of its step budget.  Exhaustion is an error,
/// never a silently wrong answer.
struct BudgetExceeded : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// A claimed homomorphism mapped a curve point to a non-point.
struct NotAPoint : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// Interval refinement hit the precision cap without a decision.
struct PrecisionCapExceeded : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// A t-parameter enclosure admitted values below 20.
struct AssertT20 : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// Expression text failed to parse; carries the byte offset.
struct SyntaxError : TowerfieldError {
  SyntaxError(const std::string& what, size_t offset_)
      : TowerfieldError(what + " (offset " + std::to_string(offset_) + ")"),
        offset(offset_) {}
  size_t offset;
};

/// Structurally valid expression with a malformed symbol (e.g. x2_2).
struct SymbolError : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

/// Malformed graph, permutation, or dump input file.
struct InputFormatError : TowerfieldError {
  using TowerfieldError::TowerfieldError;
};

}  // namespace towerfield
