#include "tcb/mpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcb {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation, then one Halley step against erfc.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inverse normal cdf: p must lie in (0,1)");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley refinement.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double worst_case_quantile(double gamma, DistributionFamily family) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("worst case quantile: gamma must lie in (0,1)");
  switch (family) {
    case DistributionFamily::general:
      return std::sqrt(gamma / (1.0 - gamma));
    case DistributionFamily::symmetric:
      return gamma > 0.5 ? std::sqrt(1.0 / (2.0 * (1.0 - gamma))) : 0.0;
    case DistributionFamily::symmetric_unimodal:
      return gamma > 0.5
                 ? (2.0 / 3.0) * std::sqrt(1.0 / (2.0 * (1.0 - gamma)))
                 : 0.0;
    case DistributionFamily::gaussian:
      return inverse_normal_cdf(gamma);
  }
  throw std::logic_error("worst case quantile: unknown family");
}

WorstCaseAccuracy worst_case_accuracy(double ratio, DistributionFamily family,
                                      double floor) {
  if (!(floor > 0.0 && floor < 0.5))
    throw std::invalid_argument("worst case accuracy: bad floor");
  WorstCaseAccuracy out;
  out.family = family;

  switch (family) {
    case DistributionFamily::general:
      if (ratio <= 0.0) {
        out.gamma = floor;
        out.out_of_range = true;
        return out;
      }
      out.gamma = ratio * ratio / (1.0 + ratio * ratio);
      break;
    case DistributionFamily::symmetric:
      if (ratio < 0.0) {
        out.gamma = floor;
        out.out_of_range = true;
        return out;
      }
      out.gamma = ratio <= 1.0 ? 0.5 : 1.0 - 1.0 / (2.0 * ratio * ratio);
      break;
    case DistributionFamily::symmetric_unimodal: {
      if (ratio < 0.0) {
        out.gamma = floor;
        out.out_of_range = true;
        return out;
      }
      const double scaled = 1.5 * ratio;
      out.gamma = scaled <= 1.0 ? 0.5 : 1.0 - 1.0 / (2.0 * scaled * scaled);
      break;
    }
    case DistributionFamily::gaussian:
      out.gamma = normal_cdf(ratio);
      break;
  }

  if (out.gamma < floor) {
    out.gamma = floor;
    out.out_of_range = true;
  } else if (out.gamma > 1.0 - floor) {
    out.gamma = 1.0 - floor;
    out.out_of_range = true;
  }
  return out;
}

WorstCaseAccuracy worst_case_accuracy(const Eigen::VectorXd& w, double b,
                                      const Eigen::VectorXd& mu1,
                                      const Eigen::MatrixXd& sigma1,
                                      DistributionFamily family,
                                      double floor) {
  if (w.size() != mu1.size() || sigma1.rows() != w.size() ||
      sigma1.cols() != w.size())
    throw std::invalid_argument("worst case accuracy: dimension mismatch");
  const double var = w.dot(sigma1 * w);
  if (!(var > 0.0))
    throw std::invalid_argument("worst case accuracy: zero projected variance");
  const double ratio = (-b + w.dot(mu1)) / std::sqrt(var);
  return worst_case_accuracy(ratio, family, floor);
}

QqResult normality_qq(const Eigen::VectorXd& margins) {
  const Eigen::Index n = margins.size();
  if (n < 3) throw std::invalid_argument("normality qq: need >= 3 samples");
  std::vector<double> sorted(margins.data(), margins.data() + n);
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back())
    throw std::invalid_argument("normality qq: constant margins");

  QqResult res;
  res.points.reserve(static_cast<std::size_t>(n));
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = inverse_normal_cdf((static_cast<double>(i) + 0.5) /
                                        static_cast<double>(n));
    const double v = sorted[static_cast<std::size_t>(i)];
    res.points.emplace_back(q, v);
    sx += q;
    sy += v;
    sxx += q * q;
    syy += v * v;
    sxy += q * v;
  }
  const double nn = static_cast<double>(n);
  const double cov = sxy - sx * sy / nn;
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  res.correlation = cov / std::sqrt(vx * vy);
  return res;
}

DiagonalityStats covariance_diagonality(const Eigen::MatrixXd& h_outputs) {
  const Eigen::Index m = h_outputs.rows();
  const Eigen::Index n = h_outputs.cols();
  if (m < 2 || n < 2)
    throw std::invalid_argument(
        "covariance diagonality: need >= 2 rows and >= 2 columns");

  const Eigen::RowVectorXd mean = h_outputs.colwise().mean();
  const Eigen::MatrixXd centered = h_outputs.rowwise() - mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(m - 1);

  DiagonalityStats stats;
  stats.mean_abs_diag =
      cov.diagonal().cwiseAbs().sum() / static_cast<double>(n);
  const double offdiag_total =
      cov.cwiseAbs().sum() - cov.diagonal().cwiseAbs().sum();
  stats.mean_abs_offdiag =
      offdiag_total / static_cast<double>(n * (n - 1));
  if (stats.mean_abs_diag == 0.0)
    throw std::invalid_argument(
        "covariance diagonality: outputs have zero variance");
  stats.ratio = stats.mean_abs_offdiag == 0.0
                    ? std::numeric_limits<double>::infinity()
                    : stats.mean_abs_diag / stats.mean_abs_offdiag;
  return stats;
}

}  // namespace tcb
