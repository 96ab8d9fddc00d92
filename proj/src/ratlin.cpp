#include "crn/ratlin.hpp"

#include <algorithm>
#include <stdexcept>

namespace crn::ratlin {

RationalMatrix RationalMatrix::from_rows(const std::vector<RatVec>& rows) {
  if (rows.empty()) return RationalMatrix(0, 0);
  RationalMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("ragged row list");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

RationalMatrix RationalMatrix::from_columns(const std::vector<RatVec>& cols) {
  if (cols.empty()) return RationalMatrix(0, 0);
  RationalMatrix m(cols.front().size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != m.rows()) throw std::invalid_argument("ragged column list");
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = cols[j][i];
  }
  return m;
}

RationalMatrix RationalMatrix::from_int_rows(const std::vector<std::vector<long long>>& rows) {
  std::vector<RatVec> r;
  r.reserve(rows.size());
  for (const auto& row : rows) r.emplace_back(row.begin(), row.end());
  return from_rows(r);
}

RationalMatrix RationalMatrix::from_int_columns(const std::vector<std::vector<long long>>& cols) {
  std::vector<RatVec> c;
  c.reserve(cols.size());
  for (const auto& col : cols) c.emplace_back(col.begin(), col.end());
  return from_columns(c);
}

RationalMatrix RationalMatrix::transposed() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RatVec RationalMatrix::row(std::size_t i) const {
  RatVec r(cols_);
  for (std::size_t j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
  return r;
}

RatVec RationalMatrix::column(std::size_t j) const {
  RatVec c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

RatVec RationalMatrix::apply(const RatVec& x) const {
  if (x.size() != cols_) throw std::invalid_argument("apply: dimension mismatch");
  RatVec y(rows_, Rational(0));
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j)
      if ((*this)(i, j) != 0 && x[j] != 0) y[i] += (*this)(i, j) * x[j];
  return y;
}

std::vector<std::size_t> rref(RationalMatrix& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t pivot = row;
    while (pivot < m.rows() && m(pivot, col) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != row)
      for (std::size_t j = col; j < m.cols(); ++j) std::swap(m(row, j), m(pivot, j));
    const Rational inv = Rational(1) / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j) m(row, j) = Rational(m(row, j) * inv);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || m(i, col) == 0) continue;
      const Rational f = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j) m(i, j) -= Rational(f * m(row, j));
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

std::size_t rank(const RationalMatrix& m) {
  RationalMatrix c = m;
  return rref(c).size();
}

IntVec primitive_normalize(const RatVec& v) {
  Integer lcm_den(1);
  for (const auto& x : v) lcm_den = lcm(lcm_den, denominator(x));
  IntVec w(v.size());
  Integer g(0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    w[i] = Integer(numerator(v[i]) * (lcm_den / denominator(v[i])));
    g = gcd(g, w[i]);
  }
  if (g == 0) return w;  // zero vector
  int sign = 0;
  for (const auto& x : w) {
    if (x != 0) {
      sign = x > 0 ? 1 : -1;
      break;
    }
  }
  for (auto& x : w) x /= (sign > 0 ? g : Integer(-g));
  return w;
}

namespace {

RatVec to_rat(const IntVec& v) { return RatVec(v.begin(), v.end()); }

}  // namespace

SubspaceBasis nullspace(const RationalMatrix& m) {
  RationalMatrix r = m;
  const std::vector<std::size_t> pivots = rref(r);
  std::vector<bool> is_pivot(m.cols(), false);
  for (std::size_t p : pivots) is_pivot[p] = true;

  SubspaceBasis basis;
  basis.ambient_dim = m.cols();
  for (std::size_t free = 0; free < m.cols(); ++free) {
    if (is_pivot[free]) continue;
    RatVec x(m.cols(), Rational(0));
    x[free] = 1;
    for (std::size_t k = 0; k < pivots.size(); ++k) x[pivots[k]] = Rational(-r(k, free));
    basis.vectors.push_back(primitive_normalize(x));
  }
  return basis;
}

SubspaceBasis span_basis(std::size_t ambient_dim, const std::vector<RatVec>& vectors) {
  SubspaceBasis basis;
  basis.ambient_dim = ambient_dim;
  if (vectors.empty()) return basis;
  RationalMatrix m = RationalMatrix::from_rows(vectors);
  if (m.cols() != ambient_dim) throw std::invalid_argument("span_basis: ambient mismatch");
  const std::vector<std::size_t> pivots = rref(m);
  for (std::size_t i = 0; i < pivots.size(); ++i)
    basis.vectors.push_back(primitive_normalize(m.row(i)));
  return basis;
}

SubspaceBasis span_basis_int(std::size_t ambient_dim, const std::vector<IntVec>& vectors) {
  std::vector<RatVec> r;
  r.reserve(vectors.size());
  for (const auto& v : vectors) r.push_back(to_rat(v));
  return span_basis(ambient_dim, r);
}

std::optional<RatVec> solve_exact(const RationalMatrix& a, const RatVec& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve_exact: dimension mismatch");
  RationalMatrix aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  const std::vector<std::size_t> pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == a.cols()) return std::nullopt;
  RatVec x(a.cols(), Rational(0));
  for (std::size_t k = 0; k < pivots.size(); ++k) x[pivots[k]] = aug(k, a.cols());
  return x;
}

bool in_span(const SubspaceBasis& basis, const RatVec& v) {
  if (v.size() != basis.ambient_dim) throw std::invalid_argument("in_span: ambient mismatch");
  bool zero = std::all_of(v.begin(), v.end(), [](const Rational& x) { return x == 0; });
  if (zero) return true;
  if (basis.empty()) return false;
  std::vector<RatVec> cols;
  cols.reserve(basis.dim());
  for (const auto& w : basis.vectors) cols.push_back(to_rat(w));
  return solve_exact(RationalMatrix::from_columns(cols), v).has_value();
}

bool in_span_int(const SubspaceBasis& basis, const IntVec& v) {
  return in_span(basis, to_rat(v));
}

bool subspace_contained(const SubspaceBasis& b1, const SubspaceBasis& b2) {
  if (b1.ambient_dim != b2.ambient_dim)
    throw std::invalid_argument("subspace comparison: ambient mismatch");
  for (const auto& v : b1.vectors)
    if (!in_span_int(b2, v)) return false;
  return true;
}

bool subspace_equal(const SubspaceBasis& b1, const SubspaceBasis& b2) {
  if (b1.ambient_dim != b2.ambient_dim)
    throw std::invalid_argument("subspace_equal: ambient mismatch");
  if (b1.dim() != b2.dim()) return false;
  std::vector<RatVec> stacked;
  for (const auto& v : b1.vectors) stacked.push_back(to_rat(v));
  for (const auto& v : b2.vectors) stacked.push_back(to_rat(v));
  if (stacked.empty()) return true;
  return rank(RationalMatrix::from_rows(stacked)) == b1.dim();
}

// ---------------------------------------------------------------------------
// Exact two-phase simplex (Bland's rule), standard form min c.z, Az=b, z>=0.
// ---------------------------------------------------------------------------

namespace {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  RatVec z;
  Rational objective;
};

class SimplexTableau {
 public:
  SimplexTableau(const RationalMatrix& a, const RatVec& b) : ncols_(a.cols()) {
    // Rows with negative b are negated so artificials start feasible.
    for (std::size_t i = 0; i < a.rows(); ++i) {
      RatVec row = a.row(i);
      Rational rhs = b[i];
      if (rhs < 0) {
        for (auto& x : row) x = Rational(-x);
        rhs = Rational(-rhs);
      }
      rows_.push_back(std::move(row));
      rhs_.push_back(rhs);
    }
  }

  // Phase 1: drive artificial variables to zero. Returns false if infeasible.
  bool phase1() {
    const std::size_t m = rows_.size();
    for (std::size_t i = 0; i < m; ++i) {
      for (auto& row : rows_) row.push_back(Rational(0));
      rows_[i].back() = 1;
      basis_.push_back(ncols_ + i);
    }
    RatVec cost(ncols_ + m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) cost[ncols_ + i] = 1;
    run(cost);
    Rational obj(0);
    for (std::size_t i = 0; i < m; ++i)
      if (basis_[i] >= ncols_) obj += rhs_[i];
    if (obj != 0) return false;
    // Pivot remaining artificials out; rows with no real column are redundant.
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < ncols_) {
        ++i;
        continue;
      }
      std::size_t col = ncols_;
      for (std::size_t j = 0; j < ncols_; ++j)
        if (rows_[i][j] != 0) {
          col = j;
          break;
        }
      if (col == ncols_) {
        rows_.erase(rows_.begin() + i);
        rhs_.erase(rhs_.begin() + i);
        basis_.erase(basis_.begin() + i);
      } else {
        pivot(i, col);
        ++i;
      }
    }
    for (auto& row : rows_) row.resize(ncols_);
    return true;
  }

  LpStatus phase2(const RatVec& cost) { return run(cost); }

  RatVec solution() const {
    RatVec z(ncols_, Rational(0));
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < ncols_) z[basis_[i]] = rhs_[i];
    return z;
  }

 private:
  void pivot(std::size_t prow, std::size_t pcol) {
    const Rational inv = Rational(1) / rows_[prow][pcol];
    for (auto& x : rows_[prow]) x = Rational(x * inv);
    rhs_[prow] = Rational(rhs_[prow] * inv);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == prow || rows_[i][pcol] == 0) continue;
      const Rational f = rows_[i][pcol];
      for (std::size_t j = 0; j < rows_[i].size(); ++j)
        rows_[i][j] -= Rational(f * rows_[prow][j]);
      rhs_[i] -= Rational(f * rhs_[prow]);
    }
    basis_[prow] = pcol;
  }

  LpStatus run(const RatVec& cost) {
    const std::size_t n = rows_.empty() ? cost.size() : rows_.front().size();
    for (;;) {
      // Reduced costs r_j = c_j - c_B B^-1 A_j from the current tableau.
      std::size_t enter = n;
      for (std::size_t j = 0; j < n; ++j) {
        bool basic = false;
        for (std::size_t b : basis_)
          if (b == j) {
            basic = true;
            break;
          }
        if (basic) continue;
        Rational r = cost[j];
        for (std::size_t i = 0; i < rows_.size(); ++i)
          if (rows_[i][j] != 0) r -= Rational(cost[basis_[i]] * rows_[i][j]);
        if (r < 0) {
          enter = j;  // Bland: lowest eligible index
          break;
        }
      }
      if (enter == n) return LpStatus::Optimal;
      std::size_t leave = rows_.size();
      Rational best;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i][enter] <= 0) continue;
        const Rational ratio = Rational(rhs_[i] / rows_[i][enter]);
        if (leave == rows_.size() || ratio < best ||
            (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows_.size()) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
  }

  std::size_t ncols_;
  std::vector<RatVec> rows_;
  RatVec rhs_;
  std::vector<std::size_t> basis_;
};

LpResult lp_min(const RationalMatrix& a, const RatVec& b, const RatVec& c) {
  SimplexTableau t(a, b);
  LpResult res;
  if (!t.phase1()) {
    res.status = LpStatus::Infeasible;
    return res;
  }
  res.status = t.phase2(c);
  if (res.status == LpStatus::Optimal) {
    res.z = t.solution();
    res.objective = 0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (res.z[j] != 0) res.objective += Rational(c[j] * res.z[j]);
  }
  return res;
}

}  // namespace

std::optional<RatVec> positive_vector_in_span(const SubspaceBasis& basis) {
  if (basis.empty() || basis.ambient_dim == 0) return std::nullopt;
  const std::size_t n = basis.ambient_dim;
  const std::size_t k = basis.dim();
  // Variables: x+ (k), x- (k), t+, t-, slacks s (n).
  const std::size_t nvar = 2 * k + 2 + n;
  RationalMatrix a(n + 1, nvar);
  RatVec b(n + 1, Rational(0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      a(j, i) = Rational(basis.vectors[i][j]);
      a(j, k + i) = Rational(-a(j, i));
    }
    a(j, 2 * k) = -1;
    a(j, 2 * k + 1) = 1;
    a(j, 2 * k + 2 + j) = -1;
  }
  for (std::size_t i = 0; i < k; ++i) {
    Rational colsum(0);
    for (std::size_t j = 0; j < n; ++j) colsum += Rational(basis.vectors[i][j]);
    a(n, i) = colsum;
    a(n, k + i) = Rational(-colsum);
  }
  b[n] = 1;
  RatVec c(nvar, Rational(0));
  c[2 * k] = -1;  // maximize t
  c[2 * k + 1] = 1;

  const LpResult res = lp_min(a, b, c);
  if (res.status != LpStatus::Optimal) return std::nullopt;
  const Rational t = Rational(-res.objective);
  if (t <= 0) return std::nullopt;
  RatVec m(n, Rational(0));
  for (std::size_t i = 0; i < k; ++i) {
    const Rational xi = Rational(res.z[i] - res.z[k + i]);
    if (xi == 0) continue;
    for (std::size_t j = 0; j < n; ++j) m[j] += Rational(xi * basis.vectors[i][j]);
  }
  return m;
}

bool span_has_positive_coordinate(const SubspaceBasis& basis, std::size_t coord) {
  if (basis.empty()) return false;
  if (coord >= basis.ambient_dim) throw std::invalid_argument("coordinate out of range");
  const std::size_t n = basis.ambient_dim;
  const std::size_t k = basis.dim();
  // maximize m(coord) with m = Bx, -1 <= m(i) <= 1: bounded, feasible at 0.
  // Variables: x+ (k), x- (k), slacks for m(i) <= 1 (n) and -m(i) <= 1 (n).
  const std::size_t nvar = 2 * k + 2 * n;
  RationalMatrix a(2 * n, nvar);
  RatVec b(2 * n, Rational(1));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      a(j, i) = Rational(basis.vectors[i][j]);
      a(j, k + i) = Rational(-a(j, i));
      a(n + j, i) = Rational(-a(j, i));
      a(n + j, k + i) = a(j, i);
    }
    a(j, 2 * k + j) = 1;
    a(n + j, 2 * k + n + j) = 1;
  }
  RatVec c(nvar, Rational(0));
  for (std::size_t i = 0; i < k; ++i) {
    c[i] = Rational(-Rational(basis.vectors[i][coord]));
    c[k + i] = Rational(basis.vectors[i][coord]);
  }
  const LpResult res = lp_min(a, b, c);
  if (res.status != LpStatus::Optimal) return false;
  return Rational(-res.objective) > 0;
}

// ---------------------------------------------------------------------------
// Column Hermite form for integer lattice membership.
// ---------------------------------------------------------------------------

bool lattice_member(const RationalMatrix& a, const IntVec& v) {
  if (v.size() != a.rows()) throw std::invalid_argument("lattice_member: dimension mismatch");
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<IntVec> col(cols, IntVec(rows));
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) {
      if (denominator(a(i, j)) != 1)
        throw std::invalid_argument("lattice_member: matrix must have integer entries");
      col[j][i] = numerator(a(i, j));
    }

  // Column echelon form via unimodular column operations; the lattice spanned
  // by the columns is preserved.
  std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, col)
  std::size_t h = 0;
  for (std::size_t r = 0; r < rows && h < cols; ++r) {
    std::size_t jnz = cols;
    for (std::size_t j = h; j < cols; ++j)
      if (col[j][r] != 0) {
        jnz = j;
        break;
      }
    if (jnz == cols) continue;
    std::swap(col[h], col[jnz]);
    for (std::size_t j = h + 1; j < cols; ++j) {
      while (col[j][r] != 0) {
        const Integer q = col[h][r] / col[j][r];
        for (std::size_t i = 0; i < rows; ++i) col[h][i] -= Integer(q * col[j][i]);
        std::swap(col[h], col[j]);
      }
    }
    if (col[h][r] < 0)
      for (auto& x : col[h]) x = Integer(-x);
    pivots.emplace_back(r, h);
    ++h;
  }

  IntVec res = v;
  std::size_t next_pivot = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (next_pivot < pivots.size() && pivots[next_pivot].first == r) {
      const std::size_t j = pivots[next_pivot].second;
      const Integer p = col[j][r];
      if (res[r] % p != 0) return false;
      const Integer y = res[r] / p;
      if (y != 0)
        for (std::size_t i = 0; i < rows; ++i) res[i] -= Integer(y * col[j][i]);
      ++next_pivot;
    } else if (res[r] != 0) {
      return false;
    }
  }
  return true;
}

}  // namespace crn::ratlin
