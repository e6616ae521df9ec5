#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace hyptree {

/// Labelled symmetric matrix of pairwise distances (zero diagonal,
/// nonnegative entries).
struct DistanceMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd d;

  int size() const { return static_cast<int>(labels.size()); }
};

inline void validate_distance_matrix(const DistanceMatrix& dm) {
  const int n = dm.size();
  if (dm.d.rows() != n || dm.d.cols() != n)
    throw std::invalid_argument("distance matrix: label/matrix size mismatch");
  std::unordered_set<std::string> seen;
  for (const auto& l : dm.labels) {
    if (l.empty()) throw std::invalid_argument("distance matrix: empty label");
    if (!seen.insert(l).second)
      throw std::invalid_argument("distance matrix: duplicate label '" + l + "'");
  }
  for (int i = 0; i < n; ++i) {
    if (dm.d(i, i) != 0.0)
      throw std::invalid_argument("distance matrix: nonzero diagonal");
    for (int j = i + 1; j < n; ++j) {
      if (dm.d(i, j) != dm.d(j, i))
        throw std::invalid_argument("distance matrix: not symmetric");
      if (!(dm.d(i, j) >= 0.0))
        throw std::invalid_argument("distance matrix: negative entry");
    }
  }
}

}  // namespace hyptree
