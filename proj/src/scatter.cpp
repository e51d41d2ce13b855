#include "tcb/scatter.hpp"

#include <stdexcept>

namespace tcb {

namespace {

// Exact block is (a - b) I + b 11^T with a = 1/m, b = -1/(m(k-1)).
struct BlockCoeffs {
  double a;
  double b;
};

BlockCoeffs exact_coeffs(Eigen::Index m, Eigen::Index k) {
  const double a = 1.0 / static_cast<double>(m);
  const double b = -1.0 / (static_cast<double>(m) * static_cast<double>(k - 1));
  return {a, b};
}

}  // namespace

ScatterMatrix ScatterMatrix::build(Eigen::Index m1, Eigen::Index m2,
                                   ScatterMode mode, bool exact, double delta) {
  if (m1 < 1 || m2 < 1)
    throw std::invalid_argument("scatter: both classes must be non-empty");
  if (delta < 0.0) throw std::invalid_argument("scatter: delta must be >= 0");
  if (exact) {
    if (m1 < 2)
      throw std::invalid_argument(
          "scatter: positive class of size 1 is degenerate in exact mode; "
          "use the diagonal approximation (exact=false)");
    if (mode == ScatterMode::lda && m2 < 2)
      throw std::invalid_argument(
          "scatter: negative class of size 1 is degenerate in exact lda "
          "mode; use the diagonal approximation (exact=false)");
  }
  ScatterMatrix q;
  q.mode_ = mode;
  q.exact_ = exact;
  q.m1_ = m1;
  q.m2_ = m2;
  q.delta_ = delta;
  return q;
}

void ScatterMatrix::check_dim(const Eigen::VectorXd& v) const {
  if (v.size() != size())
    throw std::invalid_argument("scatter: vector length does not match m");
}

Eigen::VectorXd ScatterMatrix::apply(const Eigen::VectorXd& rho) const {
  check_dim(rho);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  const double inv_m = 1.0 / static_cast<double>(size());

  if (!exact_) {
    out.head(m1_) = inv_m * rho.head(m1_);
    if (mode_ == ScatterMode::lda) out.tail(m2_) = inv_m * rho.tail(m2_);
    return out;
  }

  {
    const auto [a, b] = exact_coeffs(size(), m1_);
    const double s = rho.head(m1_).sum();
    out.head(m1_).array() = (a - b) * rho.head(m1_).array() + b * s;
  }
  if (mode_ == ScatterMode::lda) {
    const auto [a, b] = exact_coeffs(size(), m2_);
    const double s = rho.tail(m2_).sum();
    out.tail(m2_).array() = (a - b) * rho.tail(m2_).array() + b * s;
  }
  return out;
}

double ScatterMatrix::quadratic_form(const Eigen::VectorXd& rho) const {
  check_dim(rho);
  const double m = static_cast<double>(size());

  if (!exact_) {
    double t = rho.head(m1_).squaredNorm();
    if (mode_ == ScatterMode::lda) t += rho.tail(m2_).squaredNorm();
    return t / m;
  }

  auto block_form = [m](const auto& block, Eigen::Index k) {
    const double s = block.sum();
    const double t = block.squaredNorm();
    return (static_cast<double>(k) * t - s * s) /
           (m * static_cast<double>(k - 1));
  };
  double val = block_form(rho.head(m1_), m1_);
  if (mode_ == ScatterMode::lda) val += block_form(rho.tail(m2_), m2_);
  return val;
}

Eigen::VectorXd ScatterMatrix::solve_regularized(const Eigen::VectorXd& v) const {
  check_dim(v);
  if (delta_ <= 0.0)
    throw std::invalid_argument("scatter: solve requires delta > 0");
  Eigen::VectorXd out(size());

  auto solve_exact_block = [&](auto block, Eigen::Index k, auto out_block) {
    // (alpha I + beta 11^T)^{-1} by Sherman-Morrison; the ones direction
    // has eigenvalue alpha + beta k = delta.
    const auto [a, b] = exact_coeffs(size(), k);
    const double alpha = a - b + delta_;
    const double s = block.sum();
    out_block.array() = block.array() / alpha - (b / (alpha * delta_)) * s;
  };

  if (!exact_) {
    const double inv = 1.0 / (1.0 / static_cast<double>(size()) + delta_);
    out.head(m1_) = inv * v.head(m1_);
    if (mode_ == ScatterMode::lda)
      out.tail(m2_) = inv * v.tail(m2_);
    else
      out.tail(m2_) = v.tail(m2_) / delta_;
    return out;
  }

  solve_exact_block(v.head(m1_), m1_, out.head(m1_));
  if (mode_ == ScatterMode::lda)
    solve_exact_block(v.tail(m2_), m2_, out.tail(m2_));
  else
    out.tail(m2_) = v.tail(m2_) / delta_;
  return out;
}

}  // namespace tcb
