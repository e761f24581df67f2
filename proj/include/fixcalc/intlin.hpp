#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fixcalc/error.hpp"

namespace fixcalc::intlin {

// All scalar arithmetic is arbitrary precision: normal-form pivoting blows
// up intermediates even on small inputs, and a truncated entry silently
// corrupts kernel ranks.
using Int = mpz_class;
using IntVec = std::vector<Int>;

/// Dense integer matrix, row-major. Zero-dimensional shapes are legal so the
/// product machinery can treat Z^0 uniformly.
class IntMatrix {
public:
  IntMatrix() : rows_(0), cols_(0) {}
  IntMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::size_t rows, std::size_t cols, std::vector<Int> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      fail(ErrorKind::dimension, "matrix data size mismatch");
  }

  /// Build from nested initializer-style rows (ragged input is rejected).
  static IntMatrix from_rows(const std::vector<IntVec>& rows);
  static IntMatrix identity(std::size_t n);
  static IntMatrix zero(std::size_t rows, std::size_t cols) {
    return IntMatrix(rows, cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Int& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Int& at(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  IntVec row(std::size_t i) const;
  void swap_rows(std::size_t i, std::size_t j);
  void swap_cols(std::size_t i, std::size_t j);

  bool is_zero() const;
  bool is_identity() const;
  bool is_square() const { return rows_ == cols_; }

  IntMatrix transpose() const;

  friend IntMatrix operator+(const IntMatrix& a, const IntMatrix& b);
  friend IntMatrix operator-(const IntMatrix& a, const IntMatrix& b);
  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
  friend bool operator==(const IntMatrix& a, const IntMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  std::string to_string() const;

private:
  std::size_t rows_, cols_;
  std::vector<Int> data_;
};

/// row vector * matrix
IntVec mul(const IntVec& v, const IntMatrix& m);
/// matrix * column vector (v as column)
IntVec mul(const IntMatrix& m, const IntVec& v);
IntVec add(const IntVec& a, const IntVec& b);
IntVec sub(const IntVec& a, const IntVec& b);
Int dot(const IntVec& a, const IntVec& b);
bool is_zero(const IntVec& v);

/// Smith normal form U*M*V = D with U, V unimodular and D diagonal with
/// the divisibility chain d1 | d2 | ... (all d_i >= 0). D is unique.
struct SnfDecomposition {
  IntMatrix U;  // rows x rows
  IntMatrix D;  // rows x cols, diagonal
  IntMatrix V;  // cols x cols
  std::size_t rank = 0;       // number of nonzero invariant factors
  std::vector<Int> torsion;   // invariant factors > 1
  std::vector<Int> invariant_factors() const;
};

SnfDecomposition snf(const IntMatrix& m);

/// Unique Hermite-reduced basis of the row lattice of `m` (row-style HNF:
/// pivots positive, strictly staircased, entries above a pivot reduced into
/// [0, pivot)). Zero rows are dropped.
IntMatrix hermite_normal_form(const IntMatrix& m);

/// Canonical Z-basis of the left kernel {a : a*M = 0}, Hermite-reduced so
/// equal lattices compare equal. The basis spans a saturated lattice.
std::vector<IntVec> left_null_basis(const IntMatrix& m);

/// Solve a*M = b over the integers. Returns the particular solution and the
/// homogeneous basis, or nullopt when b is not in the integer row space.
struct LeftSolution {
  IntVec particular;
  std::vector<IntVec> homogeneous;
};
std::optional<LeftSolution> solve_left(const IntMatrix& m, const IntVec& b);

/// Exact determinant (Bareiss fraction-free elimination).
Int det(const IntMatrix& m);
bool is_unimodular(const IntMatrix& m);
/// Inverse of a unimodular matrix; errors with "not invertible over Z"
/// otherwise.
IntMatrix inverse_unimodular(const IntMatrix& m);

/// Structure of the quotient Z^m / Row(M) as Z^s + torsion, with an explicit
/// projection whose kernel is exactly Row(M).
class QuotientStructure {
public:
  explicit QuotientStructure(const IntMatrix& m);

  std::size_t source_dim() const { return source_dim_; }
  std::size_t free_rank() const { return free_rank_; }
  const std::vector<Int>& torsion() const { return torsion_; }
  bool is_trivial() const { return free_rank_ == 0 && torsion_.empty(); }

  struct Image {
    IntVec free;       // coordinates in Z^s
    IntVec residues;   // one residue in [0, d_i) per torsion factor
    bool is_zero() const;
  };
  Image project(const IntVec& x) const;

  /// Some x with project(x) == (free, residues); exercises surjectivity.
  IntVec preimage(const IntVec& free, const IntVec& residues) const;

  /// Order of the finite subgroup generated inside the torsion part by the
  /// given residue tuples (the free coordinates of every generator must be
  /// zero, else the subgroup is infinite and callers must not ask).
  Int torsion_subgroup_order(const std::vector<IntVec>& residue_gens) const;

  /// Order of a single torsion element.
  Int torsion_element_order(const IntVec& residues) const;

private:
  std::size_t source_dim_;
  std::size_t free_rank_;
  std::vector<Int> torsion_;
  IntMatrix free_proj_;     // m x s slice of V
  IntMatrix torsion_proj_;  // m x (#torsion) slice of V
  IntMatrix v_inverse_;     // for preimage construction
  std::vector<std::size_t> free_cols_, torsion_cols_;  // column indices in V
};

IntMatrix quotient_relation_matrix(const std::vector<IntVec>& rows,
                                   std::size_t cols);

/// Basis of {a in Z^m : a*Q = a}, i.e. the left kernel of I - Q. Covers the
/// degenerate ambient with trivial base group (endomorphisms of Z^m alone).
std::vector<IntVec> fix_of_linear(const IntMatrix& q);

}  // namespace fixcalc::intlin
