#include "ghosttrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ghosttrack {

CostMatrix::CostMatrix(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("CostMatrix: negative dimension");
  data_.assign(static_cast<size_t>(rows) * static_cast<size_t>(cols), fill);
}

namespace {

struct Dense {
  int n = 0;
  std::vector<double> a;  // n x n, row major
  double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

// Square padding. Gated and dummy cells share one price that exceeds any total real cost,
// so every optimum first maximizes the number of real pairs.
Dense pad(const CostMatrix& c, double& big) {
  double total = 0.0;
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j) {
      const double v = c(i, j);
      if (std::isnan(v) || v < 0.0) throw std::invalid_argument("solve_assignment: costs must be nonnegative");
      if (!c.gated(i, j)) total += v;
    }
  big = 1.0 + total;
  Dense d;
  d.n = std::max(c.rows(), c.cols());
  d.a.assign(static_cast<size_t>(d.n) * d.n, big);
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j)
      if (!c.gated(i, j)) d.a[static_cast<size_t>(i) * d.n + j] = c(i, j);
  return d;
}

// Shortest augmenting path Hungarian method with potentials. Returns the row -> column
// permutation; u and v satisfy u[i] + v[j] <= a(i, j) with equality on the matching.
std::vector<int> hungarian(const Dense& d, std::vector<double>& u, std::vector<double>& v) {
  const int n = d.n;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> uu(n + 1, 0.0), vv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = d.at(i0 - 1, j - 1) - uu[i0] - vv[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          uu[p[j]] += delta;
          vv[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of(n, -1);
  for (int j = 1; j <= n; ++j) col_of[p[j] - 1] = j - 1;
  u.assign(uu.begin() + 1, uu.end());
  v.assign(vv.begin() + 1, vv.end());
  return col_of;
}

// Among perfect matchings of the tight subgraph (all of them optimal), walk rows in order
// and give each the smallest real column that still admits a completion. A row left on a
// gated or dummy cell is only pinned to being unmatched, not to that particular cell.
void lexicographic_min(const Dense& d, const std::vector<double>& u, const std::vector<double>& v,
                       double eps, double big, std::vector<int>& col_of) {
  const int n = d.n;
  auto tight = [&](int i, int j) { return std::abs(d.at(i, j) - u[i] - v[j]) <= eps; };
  auto real = [&](int i, int j) { return d.at(i, j) < big; };
  std::vector<int> row_of(n);
  for (int i = 0; i < n; ++i) row_of[col_of[i]] = i;
  std::vector<char> col_fixed(n, 0);
  std::vector<char> row_unmatched(n, 0);
  auto may_take = [&](int x, int y) {
    return !col_fixed[y] && tight(x, y) && (!row_unmatched[x] || !real(x, y));
  };

  for (int i = 0; i < n; ++i) {
    const int freed = col_of[i];
    const bool on_real = real(i, freed);
    for (int j = 0; j < n; ++j) {
      if (on_real && j >= freed) break;
      if (col_fixed[j] || !real(i, j) || !tight(i, j) || j == freed) continue;
      // Rehome the current owner of j; the chain must end on the freed column.
      const int start = row_of[j];
      std::vector<int> parent_row(n, -1);  // for a column: the row that moves into it
      std::vector<char> seen(n, 0);
      std::vector<int> queue{start};
      seen[start] = 1;
      int end_col = -1;
      for (size_t q = 0; q < queue.size() && end_col < 0; ++q) {
        const int x = queue[q];
        for (int y = 0; y < n; ++y) {
          if (y == j || y == col_of[x] || parent_row[y] >= 0 || !may_take(x, y)) continue;
          parent_row[y] = x;
          if (y == freed) {
            end_col = y;
            break;
          }
          const int nx = row_of[y];
          if (nx == i || seen[nx]) continue;
          seen[nx] = 1;
          queue.push_back(nx);
        }
      }
      if (end_col < 0) continue;
      for (int y = end_col; y != j;) {
        const int x = parent_row[y];
        const int prev = col_of[x];
        col_of[x] = y;
        row_of[y] = x;
        y = prev;
      }
      col_of[i] = j;
      row_of[j] = i;
      break;
    }
    if (real(i, col_of[i]))
      col_fixed[col_of[i]] = 1;
    else
      row_unmatched[i] = 1;
  }
}

}  // namespace

Assignment solve_assignment(const CostMatrix& c) {
  Assignment out;
  if (c.empty()) return out;
  double big = 0.0;
  const Dense d = pad(c, big);
  std::vector<double> u, v;
  std::vector<int> col_of = hungarian(d, u, v);
  lexicographic_min(d, u, v, 1e-9 * big, big, col_of);
  for (int i = 0; i < c.rows(); ++i) {
    const int j = col_of[i];
    if (j < c.cols() && !c.gated(i, j)) out.emplace_back(i, j);
  }
  return out;
}

double assignment_cost(const CostMatrix& c, const Assignment& pairs) {
  double s = 0.0;
  for (const auto& [r, col] : pairs) s += c(r, col);
  return s;
}

}  // namespace ghosttrack
