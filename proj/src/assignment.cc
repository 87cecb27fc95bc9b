//
// Copyright 2026 The WPFL Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "wpfl/assignment.h"

#include <algorithm>
#include <cstdint>
#include <limits>

#include "wpfl/common.h"

namespace wpfl {
namespace {

// Lexicographic weight: first the (negated) number of real pairs, then cost.
// Potentials in the Hungarian method only need an ordered group, so the
// cardinality-first objective is solved exactly without big-M constants.
struct LexCost {
  std::int64_t count = 0;
  double cost = 0.0;

  friend LexCost operator+(LexCost a, LexCost b) {
    return {a.count + b.count, a.cost + b.cost};
  }
  friend LexCost operator-(LexCost a, LexCost b) {
    return {a.count - b.count, a.cost - b.cost};
  }
  friend bool operator<(LexCost a, LexCost b) {
    if (a.count != b.count) return a.count < b.count;
    return a.cost < b.cost;
  }
};

constexpr LexCost kUnbounded{std::numeric_limits<std::int64_t>::max() / 4,
                             0.0};

}  // namespace

CostMatrix::CostMatrix(int rows, int cols)
    : rows_(rows), cols_(cols),
      cells_(static_cast<std::size_t>(std::max(rows, 0)) * std::max(cols, 0)) {
  if (rows < 0 || cols < 0) throw DomainError("negative matrix dimension");
}

void CostMatrix::Set(int row, int col, double cost) {
  cells_.at(static_cast<std::size_t>(row) * cols_ + col) = cost;
}

void CostMatrix::SetInfeasible(int row, int col) {
  cells_.at(static_cast<std::size_t>(row) * cols_ + col).reset();
}

bool CostMatrix::IsFeasible(int row, int col) const {
  return cells_.at(static_cast<std::size_t>(row) * cols_ + col).has_value();
}

double CostMatrix::Cost(int row, int col) const {
  return cells_.at(static_cast<std::size_t>(row) * cols_ + col).value();
}

int CostMatrix::FeasibleCount() const {
  return static_cast<int>(
      std::count_if(cells_.begin(), cells_.end(),
                    [](const auto& c) { return c.has_value(); }));
}

CostMatrix CostMatrix::FromRows(const std::vector<std::vector<double>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows.front().size());
  CostMatrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw DomainError("ragged cost matrix");
    for (int j = 0; j < c; ++j) m.Set(i, j, rows[i][j]);
  }
  return m;
}

Matching SolveAssignment(const CostMatrix& costs) {
  const int rows = costs.rows();
  const int cols = costs.cols();
  Matching result;
  result.row_to_col.assign(rows, -1);
  const int n = std::max(rows, cols);
  if (n == 0 || costs.FeasibleCount() == 0) return result;

  auto weight = [&](int i, int j) -> LexCost {
    if (i < rows && j < cols && costs.IsFeasible(i, j))
      return {-1, costs.Cost(i, j)};
    return {};
  };

  // Shortest augmenting path formulation with row/column potentials,
  // 1-based with column 0 as the virtual root.
  std::vector<LexCost> u(n + 1), v(n + 1);
  std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    col_owner[0] = i;
    int j0 = 0;
    std::vector<LexCost> min_slack(n + 1, kUnbounded);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = col_owner[j0];
      LexCost delta = kUnbounded;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const LexCost cur = weight(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] = u[col_owner[j]] + delta;
          v[j] = v[j] - delta;
        } else {
          min_slack[j] = min_slack[j] - delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const int j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= n; ++j) {
    const int i = col_owner[j] - 1;
    const int c = j - 1;
    if (i < rows && c < cols && costs.IsFeasible(i, c)) result.row_to_col[i] = c;
  }
  for (int i = 0; i < rows; ++i) {
    if (result.row_to_col[i] < 0) continue;
    ++result.size;
    result.total_cost += costs.Cost(i, result.row_to_col[i]);
  }
  return result;
}

}  // namespace wpfl
