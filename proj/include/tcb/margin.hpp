#pragma once

#include <Eigen/Core>

#include <span>

#include "tcb/dataset.hpp"
#include "tcb/stumps.hpp"

namespace tcb {

// m x n matrix with entry (i, j) = y_i * h_j(x_i), entries exactly +-1.
// The sole interface between training data and the optimization layer.
// Stored column-major: column generation appends one column per selected
// weak classifier and the solvers read whole columns.
class MarginMatrix {
 public:
  explicit MarginMatrix(Eigen::Index rows) : a_(rows, 0) {}

  static MarginMatrix build(const Dataset& data,
                            std::span<const DecisionStump> classifiers);

  // Column of y_i * h(x_i) for one stump.
  static Eigen::VectorXd margin_column(const Dataset& data,
                                       const DecisionStump& stump);

  void append_column(const Eigen::VectorXd& column);

  const Eigen::MatrixXd& matrix() const { return a_; }
  Eigen::Index rows() const { return a_.rows(); }
  Eigen::Index cols() const { return a_.cols(); }

  // Margins rho = A w.
  Eigen::VectorXd margins(const Eigen::VectorXd& w) const { return a_ * w; }

 private:
  Eigen::MatrixXd a_;
};

}  // namespace tcb
