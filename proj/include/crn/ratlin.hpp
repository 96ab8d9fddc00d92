#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "crn/rational.hpp"

namespace crn::ratlin {

/**
 * Dense matrix over exact rationals. Row-major storage.
 *
 * All structural computations in this library (kernels, conservation laws,
 * cycle comparisons, feasibility) run on this type; floating point never
 * enters a structural result.
 */
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), a_(rows * cols) {}

  static RationalMatrix from_rows(const std::vector<RatVec>& rows);
  static RationalMatrix from_columns(const std::vector<RatVec>& cols);
  static RationalMatrix from_int_rows(const std::vector<std::vector<long long>>& rows);
  static RationalMatrix from_int_columns(const std::vector<std::vector<long long>>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Rational& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  RationalMatrix transposed() const;

  RatVec row(std::size_t i) const;
  RatVec column(std::size_t j) const;

  /// Matrix-vector product, exact.
  RatVec apply(const RatVec& x) const;

  bool operator==(const RationalMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> a_;
};

/**
 * Basis of a linear subspace of Q^ambient_dim.
 *
 * Vectors are linearly independent primitive integer vectors: entries have
 * gcd 1 and the first nonzero entry is positive. Produced canonically (from
 * RREF structure) so that repeated computations are bit-identical.
 */
struct SubspaceBasis {
  std::size_t ambient_dim = 0;
  std::vector<IntVec> vectors;

  std::size_t dim() const { return vectors.size(); }
  bool empty() const { return vectors.empty(); }
};

/// Reduce `m` in place to reduced row echelon form; returns pivot column indices.
std::vector<std::size_t> rref(RationalMatrix& m);

std::size_t rank(const RationalMatrix& m);

/// Scale a rational vector to a primitive integer vector with positive
/// leading entry. The zero vector maps to itself.
IntVec primitive_normalize(const RatVec& v);

/**
 * Exact kernel {x : Mx = 0}.
 *
 * The basis is canonical: one vector per RREF free column, scaled primitive,
 * ordered by free-column index.
 */
SubspaceBasis nullspace(const RationalMatrix& m);

/// Canonical basis of the span of an arbitrary (possibly dependent) family.
SubspaceBasis span_basis(std::size_t ambient_dim, const std::vector<RatVec>& vectors);
SubspaceBasis span_basis_int(std::size_t ambient_dim, const std::vector<IntVec>& vectors);

/**
 * Exact solve A x = b. Returns a particular solution (free variables zero),
 * or nullopt when b is outside the column span of A.
 *
 * Throws std::invalid_argument on dimension mismatch.
 */
std::optional<RatVec> solve_exact(const RationalMatrix& a, const RatVec& b);

/// Exact membership of v in span(basis).
bool in_span(const SubspaceBasis& basis, const RatVec& v);
bool in_span_int(const SubspaceBasis& basis, const IntVec& v);

/**
 * Strictly positive vector in span(basis), or nullopt if none exists.
 *
 * Decided by an exact simplex: maximize t subject to m = B x, m_j >= t for
 * all j and sum_j m_j = 1; a strictly positive vector exists iff the optimum
 * is positive. Bland's rule keeps the pivoting deterministic and finite.
 */
std::optional<RatVec> positive_vector_in_span(const SubspaceBasis& basis);

/// True iff some vector of span(basis) has coordinate `coord` strictly positive.
bool span_has_positive_coordinate(const SubspaceBasis& basis, std::size_t coord);

/// True iff span(b1) == span(b2). Throws std::invalid_argument on ambient mismatch.
bool subspace_equal(const SubspaceBasis& b1, const SubspaceBasis& b2);

/// True iff span(b1) is contained in span(b2).
bool subspace_contained(const SubspaceBasis& b1, const SubspaceBasis& b2);

/**
 * True iff v is an integer combination of the columns of a (which must have
 * integer entries). Decided via a column Hermite normal form of a.
 */
bool lattice_member(const RationalMatrix& a, const IntVec& v);

}  // namespace crn::ratlin
