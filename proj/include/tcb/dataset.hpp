#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace tcb {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Labeled training set, rows sorted positives-first. Features are stored
// row-major because training touches one example row at a time; the margin
// matrix built from them is column-major (column generation appends columns).
struct Dataset {
  RowMatrixXd features;        // m x d
  Eigen::VectorXi labels;      // +1 / -1, all +1 rows first
  Eigen::Index m1 = 0;         // positive count
  Eigen::Index m2 = 0;         // negative count
  std::vector<Eigen::Index> source_rows;  // sorted row -> original row

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }

  // Sorts rows positives-first (stable) and records the permutation.
  static Dataset sorted(RowMatrixXd features, Eigen::VectorXi labels);

  // Throws std::invalid_argument if any invariant is broken:
  // labels in {+1,-1}, positives-first ordering, m1 >= 1, m2 >= 1.
  void validate() const;
};

// Per-class averaging weights over example indices.
// positive sums to 1 over the positive block, negative over the negative
// block, combined = positive + negative (sums to 2, disjoint supports).
struct ClassMeanVectors {
  Eigen::VectorXd positive;
  Eigen::VectorXd negative;
  Eigen::VectorXd combined;

  static ClassMeanVectors build(Eigen::Index m1, Eigen::Index m2);
};

}  // namespace tcb
