#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "tcb/dataset.hpp"
#include "tcb/margin.hpp"
#include "tcb/scatter.hpp"
#include "tcb/simplex_qp.hpp"
#include "tcb/stumps.hpp"

namespace tcb {

enum class BoostMode { fisher, lac };

// Offset (threshold) selection over the midpoints of distinct score values,
// with half-gap sentinels outside the observed range.
struct OffsetTarget {
  enum class Kind { balanced, min_detection, max_fp };
  Kind kind = Kind::balanced;
  double min_detection = 1.0;          // Kind::min_detection
  double max_fp = 0.5;                 // Kind::max_fp
  std::optional<double> nudge_detection;  // max_fp only: step one candidate
                                          // down if detection falls short
};

struct OffsetResult {
  double b = 0.0;
  bool degenerate = false;    // all scores identical
  bool nudged = false;        // max_fp target loosened by one threshold step
  bool unreachable = false;   // no candidate met the target
};

OffsetResult find_offset(const Eigen::VectorXd& scores,
                         const Eigen::VectorXi& labels,
                         const OffsetTarget& target);

struct BoosterConfig {
  BoostMode mode = BoostMode::fisher;
  double theta = 1.0 / 15.0;   // weight of the mean-gap term
  double epsilon = 1e-6;       // dual-feasibility termination threshold
  int n_max = 100;             // weak classifier budget
  bool exact_q = true;         // exact block scatter vs diagonal approximation
  bool nonneg_mean_gap = false;  // enforce e^T rho >= 0 explicitly
  double delta = 1e-8;
  EgConfig eg = training_eg_defaults();
  OffsetTarget offset_target;

  // Tighter than the standalone solver defaults: the restricted problems
  // are small and the per-round objective trace should move monotonically
  // at the 1e-8 level.
  static EgConfig training_eg_defaults() {
    EgConfig config;
    config.tol = 1e-9;
    config.max_iters = 50000;
    return config;
  }

  void validate() const;
};

struct StrongClassifier {
  std::vector<DecisionStump> weak_classifiers;
  Eigen::VectorXd w;  // simplex coefficients
  double b = 0.0;

  // sum_j w_j h_j(x) per row.
  Eigen::VectorXd scores(const RowMatrixXd& features) const;
  // sign(score - b), sign(0) = +1.
  int predict_score(double score) const { return score >= b ? 1 : -1; }
  Eigen::Index size() const { return w.size(); }
};

struct DualState {
  Eigen::VectorXd example_weights;  // u, clamped at zero
  double max_edge = 0.0;            // r, the largest column edge
  Eigen::VectorXd raw_weights;      // theta e - Q rho before clamping
  double raw_max_edge = 0.0;        // largest edge under raw_weights; this is
                                    // the pair that closes the duality gap
};

// u = theta e - Q rho with negatives clamped to zero; r = max_j (u^T A)_j.
DualState recover_dual(const ScatterMatrix& q, const Eigen::VectorXd& margins,
                       double theta, const ClassMeanVectors& e,
                       const MarginMatrix& a);

double primal_objective(const ScatterMatrix& q, const Eigen::VectorXd& margins,
                        double theta, const ClassMeanVectors& e);

// -r - 1/2 (u - theta e)^T (Q + delta I)^{-1} (u - theta e).
// Pass the raw (unclamped) recovery for gap diagnostics: clamping injects
// components along the scatter null space that (Q + delta I)^{-1} amplifies
// by 1/delta.
double dual_objective(const ScatterMatrix& q, const Eigen::VectorXd& u,
                      double r, double theta, const ClassMeanVectors& e);

struct TrainResult {
  StrongClassifier classifier;
  DualState dual;                       // state at termination
  std::vector<double> objective_trace;  // restricted primal optimum per round
  int iterations = 0;
  bool stopped_by_epsilon = false;
  bool truncated = false;  // pool had no column with positive edge
  OffsetResult offset;
};

// Column-generation training: repeatedly add the best weak classifier under
// the current example weights, re-solve the restricted simplex QP with
// warm-started EG, and recover the dual state, until no candidate's edge
// exceeds r + epsilon or the budget runs out.
TrainResult train(const Dataset& data, WeakLearnerPool& pool,
                  const BoosterConfig& config);

struct AdaBoostResult {
  StrongClassifier classifier;  // w renormalized to the simplex, b = 0
  int rounds_run = 0;
  bool early_stop = false;  // a round had weighted error >= 1/2
  bool separable = false;   // a round reached zero weighted error
};

AdaBoostResult adaboost_train(const Dataset& data, WeakLearnerPool& pool,
                              int rounds);

enum class PostprocessMode { lac, lda };

struct PostprocessResult {
  Eigen::VectorXd w;
  double b = 0.0;
  bool degenerate_direction = false;  // class means coincide
  bool negative_mean_gap = false;     // projected mean gap came out negative
};

// Closed-form coefficient re-fit over fixed weak-classifier outputs:
// w = (Sigma + delta I)^{-1} (mu1 - mu2), b = w^T mu2, where Sigma is the
// positive-class covariance (lac) or the sum of both (lda).
PostprocessResult lac_lda_postprocess(const Eigen::MatrixXd& h_outputs,
                                      const Eigen::VectorXi& labels,
                                      PostprocessMode mode, double delta);

}  // namespace tcb
