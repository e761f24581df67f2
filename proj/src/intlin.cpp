#include "fixcalc/intlin.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace fixcalc::intlin {

IntMatrix IntMatrix::from_rows(const std::vector<IntVec>& rows) {
  std::size_t r = rows.size();
  std::size_t c = r == 0 ? 0 : rows[0].size();
  IntMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c)
      fail(ErrorKind::dimension, "ragged matrix rows");
    for (std::size_t j = 0; j < c; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

IntVec IntMatrix::row(std::size_t i) const {
  IntVec out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = at(i, j);
  return out;
}

void IntMatrix::swap_rows(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < cols_; ++k) std::swap(at(i, k), at(j, k));
}

void IntMatrix::swap_cols(std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t k = 0; k < rows_; ++k) std::swap(at(k, i), at(k, j));
}

bool IntMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Int& x) { return x == 0; });
}

bool IntMatrix::is_identity() const {
  if (rows_ != cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if (at(i, j) != (i == j ? 1 : 0)) return false;
  return true;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
  return t;
}

IntMatrix operator+(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    fail(ErrorKind::dimension, "matrix shape mismatch in +");
  IntMatrix c(a.rows_, a.cols_);
  for (std::size_t i = 0; i < a.data_.size(); ++i)
    c.data_[i] = a.data_[i] + b.data_[i];
  return c;
}

IntMatrix operator-(const IntMatrix& a, const IntMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
    fail(ErrorKind::dimension, "matrix shape mismatch in -");
  IntMatrix c(a.rows_, a.cols_);
  for (std::size_t i = 0; i < a.data_.size(); ++i)
    c.data_[i] = a.data_[i] - b.data_[i];
  return c;
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols_ != b.rows_)
    fail(ErrorKind::dimension, "matrix shape mismatch in *");
  IntMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Int& aik = a.at(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j)
        c.at(i, j) += aik * b.at(k, j);
    }
  return c;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    if (i) os << ',';
    os << '[';
    for (std::size_t j = 0; j < cols_; ++j) {
      if (j) os << ',';
      os << at(i, j);
    }
    os << ']';
  }
  os << ']';
  return os.str();
}

IntVec mul(const IntVec& v, const IntMatrix& m) {
  if (v.size() != m.rows())
    fail(ErrorKind::dimension, "vector/matrix shape mismatch");
  IntVec out(m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (v[i] == 0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m.at(i, j);
  }
  return out;
}

IntVec mul(const IntMatrix& m, const IntVec& v) {
  if (v.size() != m.cols())
    fail(ErrorKind::dimension, "matrix/vector shape mismatch");
  IntVec out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m.at(i, j) * v[j];
  return out;
}

IntVec add(const IntVec& a, const IntVec& b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "vector size mismatch");
  IntVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

IntVec sub(const IntVec& a, const IntVec& b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "vector size mismatch");
  IntVec c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Int dot(const IntVec& a, const IntVec& b) {
  if (a.size() != b.size()) fail(ErrorKind::dimension, "vector size mismatch");
  Int s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool is_zero(const IntVec& v) {
  return std::all_of(v.begin(), v.end(), [](const Int& x) { return x == 0; });
}

namespace {

// Pivot strategy: smallest nonzero absolute value in the trailing block.
// Simple and sufficient at the matrix sizes this library handles.
bool find_pivot(const IntMatrix& a, std::size_t k, std::size_t& pi,
                std::size_t& pj) {
  bool found = false;
  Int best;
  for (std::size_t i = k; i < a.rows(); ++i)
    for (std::size_t j = k; j < a.cols(); ++j) {
      if (a.at(i, j) == 0) continue;
      Int v = abs(a.at(i, j));
      if (!found || v < best) {
        found = true;
        best = v;
        pi = i;
        pj = j;
      }
    }
  return found;
}

// Round-to-nearest quotient keeps coefficients small during reduction.
Int rounded_div(const Int& a, const Int& b) {
  Int q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (2 * r > abs(b)) q += (b > 0 ? 1 : -1);
  return q;
}

}  // namespace

SnfDecomposition snf(const IntMatrix& m) {
  const std::size_t r = m.rows(), c = m.cols();
  IntMatrix a = m;
  IntMatrix u = IntMatrix::identity(r);
  IntMatrix v = IntMatrix::identity(c);

  auto row_op = [&](std::size_t dst, std::size_t src, const Int& q) {
    // row dst -= q * row src
    for (std::size_t j = 0; j < c; ++j) a.at(dst, j) -= q * a.at(src, j);
    for (std::size_t j = 0; j < r; ++j) u.at(dst, j) -= q * u.at(src, j);
  };
  auto col_op = [&](std::size_t dst, std::size_t src, const Int& q) {
    for (std::size_t i = 0; i < r; ++i) a.at(i, dst) -= q * a.at(i, src);
    for (std::size_t i = 0; i < c; ++i) v.at(i, dst) -= q * v.at(i, src);
  };

  const std::size_t steps = std::min(r, c);
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t pi, pj;
    if (!find_pivot(a, k, pi, pj)) break;
    a.swap_rows(k, pi);
    u.swap_rows(k, pi);
    a.swap_cols(k, pj);
    v.swap_cols(k, pj);

    for (;;) {
      bool clean = true;
      for (std::size_t i = k + 1; i < r; ++i) {
        if (a.at(i, k) == 0) continue;
        row_op(i, k, rounded_div(a.at(i, k), a.at(k, k)));
        if (a.at(i, k) != 0) clean = false;
      }
      for (std::size_t j = k + 1; j < c; ++j) {
        if (a.at(k, j) == 0) continue;
        col_op(j, k, rounded_div(a.at(k, j), a.at(k, k)));
        if (a.at(k, j) != 0) clean = false;
      }
      if (clean) {
        // Enforce the divisibility chain: pull any non-multiple into
        // column k and redo this step.
        bool divides_all = true;
        for (std::size_t i = k + 1; i < r && divides_all; ++i)
          for (std::size_t j = k + 1; j < c && divides_all; ++j)
            if (a.at(i, j) % a.at(k, k) != 0) {
              for (std::size_t ii = 0; ii < r; ++ii)
                a.at(ii, k) += a.at(ii, j);
              for (std::size_t ii = 0; ii < c; ++ii)
                v.at(ii, k) += v.at(ii, j);
              divides_all = false;
            }
        if (divides_all) break;
        continue;
      }
      // Residues remain: a smaller pivot surfaced, move it in place.
      std::size_t qi, qj;
      find_pivot(a, k, qi, qj);
      a.swap_rows(k, qi);
      u.swap_rows(k, qi);
      a.swap_cols(k, qj);
      v.swap_cols(k, qj);
    }

    if (a.at(k, k) < 0) {
      for (std::size_t j = 0; j < c; ++j) a.at(k, j) = -a.at(k, j);
      for (std::size_t j = 0; j < r; ++j) u.at(k, j) = -u.at(k, j);
    }
  }

  SnfDecomposition out;
  out.U = std::move(u);
  out.V = std::move(v);
  out.D = std::move(a);
  for (std::size_t k = 0; k < steps; ++k)
    if (out.D.at(k, k) != 0) {
      ++out.rank;
      if (out.D.at(k, k) > 1) out.torsion.push_back(out.D.at(k, k));
    }
  return out;
}

std::vector<Int> SnfDecomposition::invariant_factors() const {
  std::vector<Int> fs;
  for (std::size_t k = 0; k < std::min(D.rows(), D.cols()); ++k)
    if (D.at(k, k) != 0) fs.push_back(D.at(k, k));
  return fs;
}

IntMatrix hermite_normal_form(const IntMatrix& m) {
  IntMatrix a = m;
  const std::size_t rows = a.rows(), cols = a.cols();
  std::size_t pivot_row = 0;
  std::vector<std::size_t> pivot_cols;

  for (std::size_t c = 0; c < cols && pivot_row < rows; ++c) {
    // gcd-reduce the column below pivot_row to a single nonzero entry
    for (;;) {
      std::size_t best = rows;
      for (std::size_t i = pivot_row; i < rows; ++i)
        if (a.at(i, c) != 0 &&
            (best == rows || abs(a.at(i, c)) < abs(a.at(best, c))))
          best = i;
      if (best == rows) break;  // column is zero
      a.swap_rows(pivot_row, best);
      bool done = true;
      for (std::size_t i = pivot_row + 1; i < rows; ++i) {
        if (a.at(i, c) == 0) continue;
        Int q = rounded_div(a.at(i, c), a.at(pivot_row, c));
        for (std::size_t j = 0; j < cols; ++j)
          a.at(i, j) -= q * a.at(pivot_row, j);
        if (a.at(i, c) != 0) done = false;
      }
      if (done) break;
    }
    if (a.at(pivot_row, c) == 0) continue;
    if (a.at(pivot_row, c) < 0)
      for (std::size_t j = 0; j < cols; ++j)
        a.at(pivot_row, j) = -a.at(pivot_row, j);
    pivot_cols.push_back(c);
    ++pivot_row;
  }

  // Reduce entries above each pivot into [0, pivot), left to right so a
  // later reduction never disturbs an already-normalized pivot column.
  for (std::size_t k = 0; k < pivot_cols.size(); ++k) {
    std::size_t c = pivot_cols[k];
    for (std::size_t i = 0; i < k; ++i) {
      Int q;
      mpz_fdiv_q(q.get_mpz_t(), a.at(i, c).get_mpz_t(),
                 a.at(k, c).get_mpz_t());
      if (q == 0) continue;
      for (std::size_t j = 0; j < cols; ++j) a.at(i, j) -= q * a.at(k, j);
    }
  }

  IntMatrix out(pivot_cols.size(), cols);
  for (std::size_t i = 0; i < pivot_cols.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = a.at(i, j);
  return out;
}

std::vector<IntVec> left_null_basis(const IntMatrix& m) {
  SnfDecomposition s = snf(m);
  // a*M = 0  <=>  a = b*U with b supported on the zero invariant factors,
  // so the rows of U from index rank on form a basis.
  std::size_t r = m.rows();
  IntMatrix raw(r - s.rank, r);
  for (std::size_t i = s.rank; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) raw.at(i - s.rank, j) = s.U.at(i, j);
  IntMatrix h = hermite_normal_form(raw);
  std::vector<IntVec> basis;
  for (std::size_t i = 0; i < h.rows(); ++i) basis.push_back(h.row(i));
  return basis;
}

std::optional<LeftSolution> solve_left(const IntMatrix& m, const IntVec& b) {
  if (b.size() != m.cols())
    fail(ErrorKind::dimension, "solve_left: rhs length mismatch");
  SnfDecomposition s = snf(m);
  IntVec c = mul(b, s.V);  // a*M = b  <=>  (a*U^-1)*D = b*V
  const std::size_t r = m.rows(), n = m.cols();
  IntVec bprime(r);
  for (std::size_t j = 0; j < n; ++j) {
    if (j < std::min(r, n) && s.D.at(j, j) != 0) {
      if (c[j] % s.D.at(j, j) != 0) return std::nullopt;
      bprime[j] = c[j] / s.D.at(j, j);
    } else if (c[j] != 0) {
      return std::nullopt;
    }
  }
  LeftSolution out;
  out.particular = mul(bprime, s.U);
  out.homogeneous = left_null_basis(m);
  return out;
}

Int det(const IntMatrix& m) {
  if (!m.is_square()) fail(ErrorKind::dimension, "det: matrix not square");
  const std::size_t n = m.rows();
  if (n == 0) return 1;
  IntMatrix a = m;
  int sign = 1;
  Int prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a.at(k, k) == 0) {
      std::size_t swap = n;
      for (std::size_t i = k + 1; i < n; ++i)
        if (a.at(i, k) != 0) {
          swap = i;
          break;
        }
      if (swap == n) return 0;
      a.swap_rows(k, swap);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) {
        Int num = a.at(i, j) * a.at(k, k) - a.at(i, k) * a.at(k, j);
        mpz_divexact(a.at(i, j).get_mpz_t(), num.get_mpz_t(),
                     prev.get_mpz_t());
      }
    prev = a.at(k, k);
  }
  return sign * a.at(n - 1, n - 1);
}

bool is_unimodular(const IntMatrix& m) {
  if (!m.is_square()) return false;
  Int d = det(m);
  return d == 1 || d == -1;
}

IntMatrix inverse_unimodular(const IntMatrix& m) {
  if (!m.is_square() || !is_unimodular(m))
    fail(ErrorKind::verification, "not invertible over Z");
  // U*M*V = I  =>  M^-1 = V*U
  SnfDecomposition s = snf(m);
  return s.V * s.U;
}

bool QuotientStructure::Image::is_zero() const {
  return intlin::is_zero(free) && intlin::is_zero(residues);
}

QuotientStructure::QuotientStructure(const IntMatrix& m)
    : source_dim_(m.cols()) {
  SnfDecomposition s = snf(m);
  const std::size_t n = m.cols();
  for (std::size_t j = 0; j < std::min(m.rows(), n); ++j)
    if (s.D.at(j, j) > 1) {
      torsion_.push_back(s.D.at(j, j));
      torsion_cols_.push_back(j);
    }
  for (std::size_t j = 0; j < n; ++j)
    if (j >= std::min(m.rows(), n) || s.D.at(j, j) == 0) free_cols_.push_back(j);
  free_rank_ = free_cols_.size();

  free_proj_ = IntMatrix(n, free_rank_);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < free_rank_; ++j)
      free_proj_.at(i, j) = s.V.at(i, free_cols_[j]);
  torsion_proj_ = IntMatrix(n, torsion_cols_.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < torsion_cols_.size(); ++j)
      torsion_proj_.at(i, j) = s.V.at(i, torsion_cols_[j]);
  v_inverse_ = inverse_unimodular(s.V);
}

QuotientStructure::Image QuotientStructure::project(const IntVec& x) const {
  if (x.size() != source_dim_)
    fail(ErrorKind::dimension, "projection: vector length mismatch");
  Image img;
  img.free = mul(x, free_proj_);
  img.residues = mul(x, torsion_proj_);
  for (std::size_t j = 0; j < torsion_.size(); ++j) {
    mpz_fdiv_r(img.residues[j].get_mpz_t(), img.residues[j].get_mpz_t(),
               torsion_[j].get_mpz_t());
  }
  return img;
}

IntVec QuotientStructure::preimage(const IntVec& free,
                                   const IntVec& residues) const {
  if (free.size() != free_rank_ || residues.size() != torsion_.size())
    fail(ErrorKind::dimension, "preimage: coordinate length mismatch");
  IntVec y(source_dim_);
  for (std::size_t j = 0; j < free_rank_; ++j) y[free_cols_[j]] = free[j];
  for (std::size_t j = 0; j < torsion_.size(); ++j)
    y[torsion_cols_[j]] = residues[j];
  return mul(y, v_inverse_);
}

Int QuotientStructure::torsion_subgroup_order(
    const std::vector<IntVec>& residue_gens) const {
  const std::size_t r = torsion_.size();
  Int full = 1;
  for (const Int& d : torsion_) full *= d;
  if (r == 0) return 1;
  // [L' : D'] where L' is spanned by the generators plus d_i * e_i and
  // D' by the d_i * e_i alone.
  IntMatrix stacked(residue_gens.size() + r, r);
  for (std::size_t i = 0; i < residue_gens.size(); ++i) {
    if (residue_gens[i].size() != r)
      fail(ErrorKind::dimension, "torsion generator length mismatch");
    for (std::size_t j = 0; j < r; ++j) stacked.at(i, j) = residue_gens[i][j];
  }
  for (std::size_t j = 0; j < r; ++j)
    stacked.at(residue_gens.size() + j, j) = torsion_[j];
  SnfDecomposition s = snf(stacked);
  Int index_of_lprime = 1;
  for (const Int& f : s.invariant_factors()) index_of_lprime *= f;
  return full / index_of_lprime;
}

Int QuotientStructure::torsion_element_order(const IntVec& residues) const {
  if (residues.size() != torsion_.size())
    fail(ErrorKind::dimension, "torsion element length mismatch");
  Int order = 1;
  for (std::size_t j = 0; j < torsion_.size(); ++j) {
    Int g = gcd(residues[j], torsion_[j]);
    Int o = torsion_[j] / g;
    order = lcm(order, o);
  }
  return order;
}

IntMatrix quotient_relation_matrix(const std::vector<IntVec>& rows,
                                   std::size_t cols) {
  IntMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      fail(ErrorKind::dimension, "relation row length mismatch");
    for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

std::vector<IntVec> fix_of_linear(const IntMatrix& q) {
  if (!q.is_square()) fail(ErrorKind::dimension, "fix_of_linear: not square");
  return left_null_basis(IntMatrix::identity(q.rows()) - q);
}

}  // namespace fixcalc::intlin
