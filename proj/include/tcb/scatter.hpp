#pragma once

#include <Eigen/Core>

namespace tcb {

enum class ScatterMode { lda, lac };

// Block-structured within-class scatter operator over margin vectors.
//
// Exact form per class block of size k: diagonal 1/m, off-diagonal
// -1/(m(k-1)); every block row sums to zero, so the operator annihilates
// vectors constant on a block. lac zeroes the negative block entirely.
// The diagonal approximation (exact = false) replaces each active block
// with (1/m) I, valid for large class counts.
//
// The operator is never materialized densely: apply / quadratic_form /
// solve_regularized use the rank-one block structure and run in O(m).
class ScatterMatrix {
 public:
  static ScatterMatrix build(Eigen::Index m1, Eigen::Index m2,
                             ScatterMode mode, bool exact,
                             double delta = 1e-8);

  Eigen::VectorXd apply(const Eigen::VectorXd& rho) const;
  double quadratic_form(const Eigen::VectorXd& rho) const;

  // Solves (Q + delta I) x = v. Needed only for dual-side diagnostics;
  // the ones direction of each active block carries eigenvalue delta.
  Eigen::VectorXd solve_regularized(const Eigen::VectorXd& v) const;

  ScatterMode mode() const { return mode_; }
  bool exact() const { return exact_; }
  double delta() const { return delta_; }
  Eigen::Index m1() const { return m1_; }
  Eigen::Index m2() const { return m2_; }
  Eigen::Index size() const { return m1_ + m2_; }

 private:
  ScatterMode mode_ = ScatterMode::lda;
  bool exact_ = true;
  Eigen::Index m1_ = 0, m2_ = 0;
  double delta_ = 1e-8;

  void check_dim(const Eigen::VectorXd& v) const;
};

}  // namespace tcb
