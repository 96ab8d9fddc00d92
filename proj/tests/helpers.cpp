#include "helpers.hpp"

#include <functional>

namespace crn::testing {

namespace {

Rational det(const ratlin::RationalMatrix& m, const std::vector<std::size_t>& rows,
             const std::vector<std::size_t>& cols) {
  const std::size_t n = rows.size();
  if (n == 1) return m(rows[0], cols[0]);
  Rational acc(0);
  int sign = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<std::size_t> sub_rows(rows.begin() + 1, rows.end());
    std::vector<std::size_t> sub_cols;
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) sub_cols.push_back(cols[j]);
    if (m(rows[0], cols[k]) != 0)
      acc += Rational(sign) * m(rows[0], cols[k]) * det(m, sub_rows, sub_cols);
    sign = -sign;
  }
  return acc;
}

void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
             const std::function<bool(const std::vector<std::size_t>&)>& visit, bool& stop) {
  if (stop) return;
  if (cur.size() == k) {
    if (visit(cur)) stop = true;
    return;
  }
  for (std::size_t i = start; i < n; ++i) {
    cur.push_back(i);
    subsets(n, k, i + 1, cur, visit, stop);
    cur.pop_back();
    if (stop) return;
  }
}

}  // namespace

std::size_t minor_rank(const ratlin::RationalMatrix& m) {
  const std::size_t maxk = std::min(m.rows(), m.cols());
  for (std::size_t k = maxk; k >= 1; --k) {
    bool found = false;
    std::vector<std::size_t> rows;
    subsets(m.rows(), k, 0, rows,
            [&](const std::vector<std::size_t>& r) {
              bool inner_found = false;
              std::vector<std::size_t> cols;
              bool inner_stop = false;
              subsets(m.cols(), k, 0, cols,
                      [&](const std::vector<std::size_t>& c) {
                        if (det(m, r, c) != 0) {
                          inner_found = true;
                          return true;
                        }
                        return false;
                      },
                      inner_stop);
              return inner_found;
            },
            found);
    if (found) return k;
  }
  return 0;
}

namespace {

struct StrictIneq {  // sum coeff_i x_i > 0
  RatVec coeffs;
};

/// Feasibility of a system of homogeneous strict inequalities by
/// Fourier-Motzkin elimination (exact; variables eliminated back to front).
bool fm_feasible(std::vector<StrictIneq> system, std::size_t nvars) {
  for (std::size_t var = nvars; var-- > 0;) {
    std::vector<StrictIneq> lower, upper, rest;
    for (const auto& q : system) {
      if (q.coeffs[var] > 0) lower.push_back(q);
      else if (q.coeffs[var] < 0) upper.push_back(q);
      else rest.push_back(q);
    }
    // x_var > L/|a| and x_var < U/|b| pairs combine; a lower or upper bound
    // alone is always satisfiable for a free variable.
    for (const auto& lo : lower)
      for (const auto& up : upper) {
        StrictIneq combo;
        combo.coeffs.assign(var, Rational(0));
        const Rational a = lo.coeffs[var];
        const Rational b = Rational(-up.coeffs[var]);
        for (std::size_t i = 0; i < var; ++i)
          combo.coeffs[i] = Rational(b * lo.coeffs[i] + a * up.coeffs[i]);
        combo.coeffs.resize(nvars, Rational(0));
        rest.push_back(std::move(combo));
      }
    for (auto& q : rest) q.coeffs[var] = 0;
    system = std::move(rest);
  }
  // Only constant rows 0 > 0 remain; any such row is infeasible.
  for (const auto& q : system) {
    bool all_zero = true;
    for (const auto& c : q.coeffs)
      if (c != 0) all_zero = false;
    if (all_zero) return false;  // reduced to 0 > 0
  }
  return true;
}

}  // namespace

bool positive_span_oracle_fm(const ratlin::SubspaceBasis& basis) {
  if (basis.empty()) return false;
  const std::size_t k = basis.dim();
  std::vector<StrictIneq> system;
  for (std::size_t j = 0; j < basis.ambient_dim; ++j) {
    StrictIneq q;
    q.coeffs.assign(k, Rational(0));
    for (std::size_t i = 0; i < k; ++i) q.coeffs[i] = Rational(basis.vectors[i][j]);
    bool all_zero = true;
    for (const auto& c : q.coeffs)
      if (c != 0) all_zero = false;
    if (all_zero) return false;  // that coordinate is identically zero
    system.push_back(std::move(q));
  }
  return fm_feasible(std::move(system), k);
}

bool lattice_member_bruteforce(const ratlin::RationalMatrix& a, const IntVec& v) {
  const std::size_t cols = a.cols();
  std::vector<long long> lambda(cols, -10);
  for (;;) {
    IntVec acc(a.rows(), Integer(0));
    for (std::size_t j = 0; j < cols; ++j)
      for (std::size_t i = 0; i < a.rows(); ++i)
        acc[i] += Integer(lambda[j]) * numerator(a(i, j));
    if (acc == v) return true;
    std::size_t pos = 0;
    while (pos < cols && lambda[pos] == 10) lambda[pos++] = -10;
    if (pos == cols) return false;
    ++lambda[pos];
  }
}

}  // namespace crn::testing
