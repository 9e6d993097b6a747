#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace ghosttrack {

/// Dense rows x cols cost table. Entries are nonnegative or +inf (gated out).
class CostMatrix {
 public:
  static constexpr double kGated = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  bool gated(int r, int c) const { return !(operator()(r, c) < kGated); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

using Assignment = std::vector<std::pair<int, int>>;

/// Optimal assignment over non-gated entries: the largest possible number of pairs,
/// then the smallest total cost. Among equal optima, the lexicographically smallest
/// (row, col) assignment is returned. Pairs are sorted by row.
Assignment solve_assignment(const CostMatrix& c);

/// Sum of the costs of the given pairs.
double assignment_cost(const CostMatrix& c, const Assignment& pairs);

}  // namespace ghosttrack
