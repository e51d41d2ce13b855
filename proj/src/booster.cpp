#include "tcb/booster.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcb {

void BoosterConfig::validate() const {
  if (theta <= 0.0) throw std::invalid_argument("booster: theta must be > 0");
  if (epsilon <= 0.0)
    throw std::invalid_argument("booster: epsilon must be > 0");
  if (n_max < 1) throw std::invalid_argument("booster: n_max must be >= 1");
  if (delta < 0.0) throw std::invalid_argument("booster: delta must be >= 0");
}

Eigen::VectorXd StrongClassifier::scores(const RowMatrixXd& features) const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(features.rows());
  for (std::size_t j = 0; j < weak_classifiers.size(); ++j)
    s += w[static_cast<Eigen::Index>(j)] *
         weak_classifiers[j].evaluate(features);
  return s;
}

// ---------------------------------------------------------------------------
// Offset search

namespace {

std::vector<double> offset_candidates(const Eigen::VectorXd& scores,
                                      bool* degenerate) {
  std::vector<double> vals(scores.data(), scores.data() + scores.size());
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  *degenerate = vals.size() == 1;
  if (vals.size() == 1) return vals;

  std::vector<double> cand;
  cand.reserve(vals.size() + 1);
  cand.push_back(vals.front() - 0.5 * (vals[1] - vals[0]));
  for (std::size_t i = 0; i + 1 < vals.size(); ++i)
    cand.push_back(0.5 * (vals[i] + vals[i + 1]));
  cand.push_back(vals.back() +
                 0.5 * (vals[vals.size() - 1] - vals[vals.size() - 2]));
  return cand;
}

}  // namespace

OffsetResult find_offset(const Eigen::VectorXd& scores,
                         const Eigen::VectorXi& labels,
                         const OffsetTarget& target) {
  if (scores.size() == 0 || scores.size() != labels.size())
    throw std::invalid_argument("offset: score/label size mismatch");
  if (!scores.allFinite())
    throw std::invalid_argument("offset: scores must be finite");

  std::vector<double> pos, neg;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  // Accepted means score >= b.
  auto count_at_least = [](const std::vector<double>& v, double b) {
    return static_cast<double>(v.end() -
                               std::lower_bound(v.begin(), v.end(), b));
  };
  auto detection = [&](double b) {
    return count_at_least(pos, b) / static_cast<double>(pos.size());
  };
  auto fp_rate = [&](double b) {
    return count_at_least(neg, b) / static_cast<double>(neg.size());
  };

  OffsetResult res;
  const std::vector<double> cand = offset_candidates(scores, &res.degenerate);

  switch (target.kind) {
    case OffsetTarget::Kind::balanced: {
      // errors = accepted negatives + rejected positives
      double best_err = std::numeric_limits<double>::infinity();
      for (double b : cand) {
        const double total = count_at_least(neg, b) +
                             (static_cast<double>(pos.size()) -
                              count_at_least(pos, b));
        if (total < best_err) {
          best_err = total;
          res.b = b;
        }
      }
      break;
    }
    case OffsetTarget::Kind::min_detection: {
      if (pos.empty())
        throw std::invalid_argument("offset: detection target needs positives");
      res.unreachable = true;
      res.b = cand.front();
      for (auto it = cand.rbegin(); it != cand.rend(); ++it) {
        if (detection(*it) >= target.min_detection) {
          res.b = *it;
          res.unreachable = false;
          break;
        }
      }
      break;
    }
    case OffsetTarget::Kind::max_fp: {
      if (neg.empty())
        throw std::invalid_argument(
            "offset: false-positive target needs negatives");
      // Smallest b keeping fp <= target, i.e. the largest admissible
      // false-positive rate, which maximizes detection.
      std::size_t chosen = cand.size();
      for (std::size_t i = 0; i < cand.size(); ++i) {
        if (fp_rate(cand[i]) <= target.max_fp) {
          chosen = i;
          break;
        }
      }
      if (chosen == cand.size()) {
        res.unreachable = true;
        chosen = cand.size() - 1;
      }
      if (target.nudge_detection && !pos.empty() && chosen > 0 &&
          detection(cand[chosen]) < *target.nudge_detection) {
        --chosen;
        res.nudged = true;
      }
      res.b = cand[chosen];
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Dual recovery and objectives

DualState recover_dual(const ScatterMatrix& q, const Eigen::VectorXd& margins,
                       double theta, const ClassMeanVectors& e,
                       const MarginMatrix& a) {
  if (margins.size() != q.size() || a.rows() != q.size())
    throw std::invalid_argument("recover_dual: dimension mismatch");
  if (a.cols() == 0)
    throw std::invalid_argument("recover_dual: margin matrix has no columns");
  DualState d;
  d.raw_weights = theta * e.combined - q.apply(margins);
  d.example_weights = d.raw_weights.cwiseMax(0.0);
  d.max_edge = (a.matrix().transpose() * d.example_weights).maxCoeff();
  d.raw_max_edge = (a.matrix().transpose() * d.raw_weights).maxCoeff();
  return d;
}

double primal_objective(const ScatterMatrix& q, const Eigen::VectorXd& margins,
                        double theta, const ClassMeanVectors& e) {
  return 0.5 * q.quadratic_form(margins) - theta * e.combined.dot(margins);
}

double dual_objective(const ScatterMatrix& q, const Eigen::VectorXd& u,
                      double r, double theta, const ClassMeanVectors& e) {
  const Eigen::VectorXd diff = u - theta * e.combined;
  return -r - 0.5 * diff.dot(q.solve_regularized(diff));
}

// ---------------------------------------------------------------------------
// Column generation

namespace {

// Dykstra's alternating projection onto simplex /\ {w : g^T w >= 0}.
Eigen::VectorXd project_simplex_halfspace(const Eigen::VectorXd& v,
                                          const Eigen::VectorXd& g) {
  const double g_norm2 = g.squaredNorm();
  auto project_halfspace = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double viol = g.dot(x);
    if (viol >= 0.0 || g_norm2 == 0.0) return x;
    return x - (viol / g_norm2) * g;
  };

  Eigen::VectorXd x = v;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd q = Eigen::VectorXd::Zero(v.size());
  for (int k = 0; k < 500; ++k) {
    const Eigen::VectorXd y = project_to_simplex(x + p);
    p = x + p - y;
    const Eigen::VectorXd x_next = project_halfspace(y + q);
    q = y + q - x_next;
    if ((x_next - x).cwiseAbs().maxCoeff() < 1e-15 && g.dot(x_next) >= -1e-14)
      return x_next;
    x = x_next;
  }
  return x;
}

// Projected gradient under the extra half-space; only runs when the EG
// solution violates the explicit nonnegative-mean-gap constraint.
Eigen::VectorXd constrained_reference_solve(const SimplexQP& qp,
                                            const Eigen::VectorXd& g,
                                            double tol) {
  const double l_smooth =
      std::max(qp.p.cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);
  Eigen::VectorXd w = project_simplex_halfspace(
      Eigen::VectorXd::Constant(qp.n(), 1.0 / qp.n()), g);
  constexpr int kMaxIters = 200000;
  for (int k = 1; k <= kMaxIters; ++k) {
    const Eigen::VectorXd step = w - qp.gradient(w) / l_smooth;
    Eigen::VectorXd w_next = project_simplex_halfspace(step, g);
    const double residual = (w_next - w).norm() * l_smooth;
    w = std::move(w_next);
    if (residual <= tol) return w;
  }
  throw std::runtime_error(
      "constrained solve: no convergence within the iteration cap");
}

}  // namespace

TrainResult train(const Dataset& data, WeakLearnerPool& pool,
                  const BoosterConfig& config) {
  config.validate();
  data.validate();
  const Eigen::Index m = data.rows();
  const ScatterMode smode =
      config.mode == BoostMode::fisher ? ScatterMode::lda : ScatterMode::lac;
  const ScatterMatrix q =
      ScatterMatrix::build(data.m1, data.m2, smode, config.exact_q,
                           config.delta);
  const ClassMeanVectors e = ClassMeanVectors::build(data.m1, data.m2);

  MarginMatrix a(m);
  Eigen::MatrixXd p(0, 0);
  Eigen::VectorXd c(0);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  double r = 0.0;
  Eigen::VectorXd w;
  std::vector<DecisionStump> stumps;
  TrainResult result;

  for (int round = 1; round <= config.n_max; ++round) {
    const BestStump cand = best_stump(pool, data, u);
    if (round > 1 && cand.edge < r + config.epsilon) {
      result.stopped_by_epsilon = true;
      break;
    }
    if (cand.edge <= 0.0) {
      result.truncated = true;
      break;
    }

    const Eigen::VectorXd col = MarginMatrix::margin_column(data, cand.stump);
    const Eigen::VectorXd q_col = q.apply(col);
    const Eigen::Index n = a.cols() + 1;
    p.conservativeResize(n, n);
    if (n > 1) {
      const Eigen::VectorXd cross = a.matrix().transpose() * q_col;
      p.col(n - 1).head(n - 1) = cross;
      p.row(n - 1).head(n - 1) = cross.transpose();
    }
    p(n - 1, n - 1) = col.dot(q_col);
    c.conservativeResize(n);
    c[n - 1] = config.theta * e.combined.dot(col);
    a.append_column(col);
    stumps.push_back(cand.stump);

    SimplexQP qp{p, c};
    EgConfig eg = config.eg;
    if (n > 1) {
      // Small perturbation of the previous optimum: the fresh coordinate
      // starts tiny and grows multiplicatively if its column is useful.
      Eigen::VectorXd w0(n);
      w0.head(n - 1) = w;
      w0[n - 1] = 1e-4;
      w0 /= w0.sum();
      eg.warm_start = std::move(w0);
    } else {
      eg.warm_start.reset();
    }
    const QpSolution sol = eg_solve(qp, eg);
    w = sol.w;

    if (config.nonneg_mean_gap && c.dot(w) < 0.0) {
      // c = theta A^T e, so c^T w < 0 means the mean gap went negative.
      w = constrained_reference_solve(qp, c / config.theta, 1e-10);
    }

    const Eigen::VectorXd rho = a.margins(w);
    result.dual = recover_dual(q, rho, config.theta, e, a);
    u = result.dual.example_weights;
    r = result.dual.max_edge;
    result.objective_trace.push_back(qp.objective(w));
    result.iterations = round;
  }

  result.classifier.weak_classifiers = stumps;
  result.classifier.w = stumps.empty() ? Eigen::VectorXd() : w;
  if (!stumps.empty()) {
    const Eigen::VectorXd rho = a.margins(w);
    Eigen::VectorXd scores(m);
    for (Eigen::Index i = 0; i < m; ++i)
      scores[i] = data.labels[i] * rho[i];  // y_i rho_i = sum_j w_j h_j(x_i)
    result.offset = find_offset(scores, data.labels, config.offset_target);
    result.classifier.b = result.offset.b;
  }
  return result;
}

// ---------------------------------------------------------------------------
// AdaBoost baseline

AdaBoostResult adaboost_train(const Dataset& data, WeakLearnerPool& pool,
                              int rounds) {
  if (rounds < 1) throw std::invalid_argument("adaboost: rounds must be >= 1");
  data.validate();
  const Eigen::Index m = data.rows();
  const double alpha_cap = 0.5 * std::log(1e10);

  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  AdaBoostResult result;
  std::vector<double> alphas;

  for (int t = 0; t < rounds; ++t) {
    const BestStump cand = best_stump(pool, data, u);
    const double err = 0.5 * (1.0 - cand.edge);  // u sums to one
    if (err >= 0.5) {
      result.early_stop = true;
      break;
    }
    const double alpha = std::min(
        alpha_cap, 0.5 * std::log((1.0 - err) / std::max(err, 1e-300)));
    result.classifier.weak_classifiers.push_back(cand.stump);
    alphas.push_back(alpha);
    ++result.rounds_run;

    if (err <= 0.0) {
      result.separable = true;
      break;
    }
    const Eigen::VectorXd h = cand.stump.evaluate(data.features);
    for (Eigen::Index i = 0; i < m; ++i)
      u[i] *= std::exp(-alpha * data.labels[i] * h[i]);
    u /= u.sum();
  }

  if (!alphas.empty()) {
    Eigen::VectorXd w =
        Eigen::Map<const Eigen::VectorXd>(alphas.data(),
                                          static_cast<Eigen::Index>(alphas.size()));
    result.classifier.w = w / w.sum();
  } else {
    result.classifier.w = Eigen::VectorXd();
  }
  result.classifier.b = 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// Closed-form post-processing

PostprocessResult lac_lda_postprocess(const Eigen::MatrixXd& h_outputs,
                                      const Eigen::VectorXi& labels,
                                      PostprocessMode mode, double delta) {
  const Eigen::Index m = h_outputs.rows();
  const Eigen::Index n = h_outputs.cols();
  if (m != labels.size())
    throw std::invalid_argument("postprocess: output/label size mismatch");
  if (n < 1) throw std::invalid_argument("postprocess: no weak outputs");
  if (delta < 0.0)
    throw std::invalid_argument("postprocess: delta must be >= 0");

  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < m; ++i)
    (labels[i] == 1 ? pos : neg).push_back(i);
  if (pos.size() < 2 || neg.size() < 2)
    throw std::invalid_argument("postprocess: each class needs >= 2 examples");

  auto class_stats = [&](const std::vector<Eigen::Index>& idx,
                         Eigen::VectorXd* mean, Eigen::MatrixXd* cov) {
    const auto k = static_cast<double>(idx.size());
    mean->setZero(n);
    for (Eigen::Index i : idx) *mean += h_outputs.row(i).transpose();
    *mean /= k;
    cov->setZero(n, n);
    for (Eigen::Index i : idx) {
      const Eigen::VectorXd d = h_outputs.row(i).transpose() - *mean;
      *cov += d * d.transpose();
    }
    *cov /= (k - 1.0);  // unbiased, matching the pairwise-difference identity
  };

  Eigen::VectorXd mu1, mu2;
  Eigen::MatrixXd sigma(n, n), sigma2(n, n);
  class_stats(pos, &mu1, &sigma);
  class_stats(neg, &mu2, &sigma2);
  if (mode == PostprocessMode::lda) sigma += sigma2;
  sigma.diagonal().array() += delta;

  const Eigen::VectorXd gap = mu1 - mu2;
  PostprocessResult res;
  if (gap.cwiseAbs().maxCoeff() == 0.0) {
    res.w = Eigen::VectorXd::Zero(n);
    res.b = 0.0;
    res.degenerate_direction = true;
    return res;
  }

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  res.w = ldlt.solve(gap);
  const double residual = (sigma * res.w - gap).norm();
  if (ldlt.info() != Eigen::Success || !res.w.allFinite() ||
      residual > 1e-8 * std::max(1.0, gap.norm()))
    throw std::runtime_error(
        "postprocess: singular covariance; raise delta to regularize");
  res.b = res.w.dot(mu2);
  res.negative_mean_gap = res.w.dot(gap) < 0.0;
  return res;
}

}  // namespace tcb
