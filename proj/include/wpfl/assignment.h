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

#ifndef WPFL_ASSIGNMENT_H_
#define WPFL_ASSIGNMENT_H_

#include <optional>
#include <vector>

namespace wpfl {

// Dense rows x cols cost matrix where a cell is either a finite cost or the
// infeasible sentinel (no value). Infeasible cells never appear in a matching.
class CostMatrix {
 public:
  CostMatrix(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  void Set(int row, int col, double cost);
  void SetInfeasible(int row, int col);
  bool IsFeasible(int row, int col) const;
  // Requires IsFeasible(row, col).
  double Cost(int row, int col) const;
  int FeasibleCount() const;

  static CostMatrix FromRows(const std::vector<std::vector<double>>& rows);

 private:
  int rows_;
  int cols_;
  std::vector<std::optional<double>> cells_;
};

struct Matching {
  // row_to_col[r] = matched column or -1.
  std::vector<int> row_to_col;
  int size = 0;
  // Sum of matched costs accumulated in increasing row order.
  double total_cost = 0.0;
};

// Kuhn-Munkres on the square padding of `costs`. Among all one-to-one
// matchings over feasible cells, returns one of maximum cardinality and, among
// those, of minimum total cost. O(max(rows, cols)^3).
Matching SolveAssignment(const CostMatrix& costs);

}  // namespace wpfl

#endif  // WPFL_ASSIGNMENT_H_
