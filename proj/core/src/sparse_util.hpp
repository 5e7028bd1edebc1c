#pragma once

#include "squaremap/common.hpp"

#include <vector>

namespace sqm::detail {

/// Submatrix A(rows, cols) of a sparse matrix, given index lists.
inline SparseMat submatrix(const SparseMat& A, const std::vector<int>& rows,
                           const std::vector<int>& cols) {
  std::vector<int> row_pos(A.rows(), -1), col_pos(A.cols(), -1);
  for (size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<int>(i);
  for (size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);

  std::vector<Eigen::Triplet<double>> trip;
  for (int outer = 0; outer < A.outerSize(); ++outer) {
    if (col_pos[outer] < 0) continue;
    for (SparseMat::InnerIterator it(A, outer); it; ++it) {
      if (row_pos[it.row()] >= 0) {
        trip.emplace_back(row_pos[it.row()], col_pos[outer], it.value());
      }
    }
  }
  SparseMat out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

/// Gathers entries of a full vector at the given indices.
inline Eigen::VectorXd gather(const Eigen::VectorXd& x,
                              const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
  return out;
}

/// Scatters values into a full vector at the given indices.
inline void scatter(const Eigen::VectorXd& values, const std::vector<int>& idx,
                    Eigen::VectorXd* x) {
  for (size_t i = 0; i < idx.size(); ++i) (*x)[idx[i]] = values[i];
}

}  // namespace sqm::detail
