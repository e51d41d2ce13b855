#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>

namespace tcb {

// min over the unit simplex of f(w) = 1/2 w^T P w - c^T w.
struct SimplexQP {
  Eigen::MatrixXd p;  // n x n, symmetric PSD
  Eigen::VectorXd c;

  Eigen::Index n() const { return c.size(); }
  double objective(const Eigen::VectorXd& w) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& w) const;

  // Throws on empty problems, shape mismatch, or asymmetry beyond 1e-10.
  void validate() const;
};

enum class StepSchedule {
  // tau_k = sqrt(2 log n) / (L_f sqrt(k)), the classic mirror-descent rate.
  theory,
  // Constant step; defaults to 1 / max|P_ij|, the relative-smoothness
  // constant of f w.r.t. the entropy mirror map, which makes every
  // multiplicative update a descent step.
  fixed,
};

struct EgConfig {
  int max_iters = 10000;
  double tol = 1e-7;
  double lipschitz = 0.0;    // gradient sup-norm bound; 0 = derive from P, c
  double fixed_step = 0.0;   // constant for StepSchedule::fixed; 0 = auto
  StepSchedule step_schedule = StepSchedule::fixed;
  std::optional<Eigen::VectorXd> warm_start;  // must be simplex-interior

  // Test hook: called with every iterate after renormalization.
  std::function<void(const Eigen::VectorXd&)> iterate_observer;
};

struct QpSolution {
  Eigen::VectorXd w;
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
};

// Entropic (exponentiated) gradient descent. Iterates stay strictly inside
// the simplex; the returned objective never exceeds the starting one.
QpSolution eg_solve(const SimplexQP& qp, const EgConfig& config = {});

// Accelerated projected-gradient reference solver, run until the
// Frank-Wolfe gap (an upper bound on f(w) - f*) drops below tol.
// Throws if the hard iteration cap is hit first. Test oracle; O(n^2)/iter.
QpSolution reference_solve(const SimplexQP& qp, double tol);

// Upper bound on max over the simplex of ||grad f||_inf:
// max row absolute sum of P plus ||c||_inf.
double auto_lipschitz(const SimplexQP& qp);

// Euclidean projection onto the unit simplex.
Eigen::VectorXd project_to_simplex(Eigen::VectorXd v);

}  // namespace tcb
