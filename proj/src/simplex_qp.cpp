#include "tcb/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcb {

double SimplexQP::objective(const Eigen::VectorXd& w) const {
  return 0.5 * w.dot(p * w) - c.dot(w);
}

Eigen::VectorXd SimplexQP::gradient(const Eigen::VectorXd& w) const {
  return p * w - c;
}

void SimplexQP::validate() const {
  if (n() < 1) throw std::invalid_argument("simplex qp: empty problem");
  if (p.rows() != n() || p.cols() != n())
    throw std::invalid_argument("simplex qp: P must be n x n");
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if ((p - p.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("simplex qp: P is not symmetric");
}

double auto_lipschitz(const SimplexQP& qp) {
  const double row_sum = qp.p.cwiseAbs().rowwise().sum().maxCoeff();
  return row_sum + qp.c.cwiseAbs().maxCoeff();
}

namespace {

constexpr double kExponentClamp = 500.0;
// Keeps iterates strictly interior while letting a crushed coordinate
// regrow within a few dozen multiplicative steps.
constexpr double kWeightFloor = 1e-12;

Eigen::VectorXd starting_point(const SimplexQP& qp, const EgConfig& config) {
  const Eigen::Index n = qp.n();
  if (!config.warm_start) return Eigen::VectorXd::Constant(n, 1.0 / n);
  const Eigen::VectorXd& w0 = *config.warm_start;
  if (w0.size() != n)
    throw std::invalid_argument("eg: warm start has wrong dimension");
  if (w0.minCoeff() <= 0.0 || std::abs(w0.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("eg: warm start is not simplex-interior");
  return w0;
}

double fixed_step_constant(const SimplexQP& qp, const EgConfig& config) {
  if (config.fixed_step > 0.0) return config.fixed_step;
  const double max_p = qp.p.cwiseAbs().maxCoeff();
  if (max_p > 0.0) return 1.0 / max_p;
  // Linear objective: one aggressive step lands on the optimal vertex.
  const double max_c = qp.c.cwiseAbs().maxCoeff();
  return max_c > 0.0 ? kExponentClamp / max_c : 1.0;
}

}  // namespace

QpSolution eg_solve(const SimplexQP& qp, const EgConfig& config) {
  qp.validate();
  if (config.tol <= 0.0) throw std::invalid_argument("eg: tol must be > 0");
  const Eigen::Index n = qp.n();

  Eigen::VectorXd w = starting_point(qp, config);
  if (n == 1) {
    return {Eigen::VectorXd::Ones(1), qp.objective(w), 0, true};
  }

  const double lf =
      config.lipschitz > 0.0 ? config.lipschitz : auto_lipschitz(qp);
  const double theory_base = std::sqrt(2.0 * std::log(static_cast<double>(n)));
  const double fixed_tau = fixed_step_constant(qp, config);

  double f_prev = qp.objective(w);
  Eigen::VectorXd w_best = w;
  double f_best = f_prev;
  int iters = 0;
  bool converged = false;

  if (config.step_schedule == StepSchedule::theory && lf <= 0.0) {
    // Constant objective; nothing to do.
    return {w, f_prev, 0, true};
  }

  Eigen::VectorXd log_next(n);
  for (int k = 1; k <= config.max_iters; ++k) {
    const Eigen::VectorXd g = qp.gradient(w);
    if (!g.allFinite())
      throw std::runtime_error("eg: non-finite gradient (ill-conditioned P?)");
    // Frank-Wolfe gap, an upper bound on f(w) - f*. Movement alone can look
    // converged while a warm-started coordinate is still microscopic.
    const double fw_gap = g.dot(w) - g.minCoeff();

    const double tau = config.step_schedule == StepSchedule::theory
                           ? theory_base / (lf * std::sqrt(static_cast<double>(k)))
                           : fixed_tau;

    // Multiplicative update in log space; the shift keeps exp() bounded and
    // the renormalization restores an exact simplex point.
    log_next = w.array().log() -
               (tau * g.array()).cwiseMin(kExponentClamp).cwiseMax(-kExponentClamp);
    log_next.array() -= log_next.maxCoeff();
    Eigen::VectorXd w_next = log_next.array().exp().max(kWeightFloor);
    w_next /= w_next.sum();

    const double f_next = qp.objective(w_next);
    const double movement = (w_next - w).cwiseAbs().sum();
    w = std::move(w_next);
    iters = k;
    if (config.iterate_observer) config.iterate_observer(w);
    if (f_next < f_best) {
      f_best = f_next;
      w_best = w;
    }
    const bool small_decrease =
        std::abs(f_next - f_prev) < config.tol * (1.0 + std::abs(f_next));
    const bool stationary = fw_gap <= config.tol * (1.0 + std::abs(f_next));
    f_prev = f_next;
    if (small_decrease && movement < config.tol && stationary) {
      converged = true;
      break;
    }
  }

  return {w_best, f_best, iters, converged};
}

Eigen::VectorXd project_to_simplex(Eigen::VectorXd v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("simplex projection: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0;
  double threshold = (u[0] - 1.0);  // fallback: all mass on the top entry
  for (Eigen::Index i = 0; i < n; ++i) {
    css += u[static_cast<std::size_t>(i)];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0.0) threshold = t;
  }
  v.array() = (v.array() - threshold).max(0.0);
  return v;
}

QpSolution reference_solve(const SimplexQP& qp, double tol) {
  qp.validate();
  if (tol <= 0.0)
    throw std::invalid_argument("reference solve: tol must be > 0");
  if (qp.n() > 10000)
    throw std::invalid_argument("reference solve: n too large for the oracle");
  const Eigen::Index n = qp.n();
  if (n == 1) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
    return {w, qp.objective(w), 0, true};
  }

  // Gershgorin bound dominates the top eigenvalue, so 1/L is a safe step.
  const double l_smooth =
      std::max(qp.p.cwiseAbs().rowwise().sum().maxCoeff(), 1e-12);

  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd y = w;
  double t_momentum = 1.0;
  double f_w = qp.objective(w);

  constexpr int kMaxIters = 500000;
  for (int k = 1; k <= kMaxIters; ++k) {
    const Eigen::VectorXd g_y = qp.gradient(y);
    Eigen::VectorXd w_next = project_to_simplex(y - g_y / l_smooth);
    const double f_next = qp.objective(w_next);

    // Function-value restart keeps the momentum sequence monotone.
    if (f_next > f_w) {
      y = w;
      t_momentum = 1.0;
      const Eigen::VectorXd g_w = qp.gradient(w);
      w_next = project_to_simplex(w - g_w / l_smooth);
    }
    const double t_next =
        0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    y = w_next + ((t_momentum - 1.0) / t_next) * (w_next - w);
    w = std::move(w_next);
    t_momentum = t_next;
    f_w = qp.objective(w);

    const Eigen::VectorXd g = qp.gradient(w);
    const double fw_gap = g.dot(w) - g.minCoeff();
    if (fw_gap <= tol) return {w, f_w, k, true};
  }
  throw std::runtime_error(
      "reference solve: no convergence within the iteration cap");
}

}  // namespace tcb
