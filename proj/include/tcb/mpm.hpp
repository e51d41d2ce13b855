#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

namespace tcb {

// Distribution family assumed for the important class when converting a
// worst-case probability bound into a deterministic margin condition.
enum class DistributionFamily {
  general,            // mean and covariance only
  symmetric,          // additionally symmetric about the mean
  symmetric_unimodal, // symmetric and linear unimodal
  gaussian,
};

// Inverse standard-normal CDF. Rational approximation with one Halley
// refinement; absolute error well below 1.15e-9 over (0, 1).
double inverse_normal_cdf(double p);

double normal_cdf(double x);

// Worst-case multiplier on the projected standard deviation required to
// certify accuracy gamma for the given family. Strictly increasing in
// gamma wherever nonzero; the symmetric families return 0 for gamma <= 0.5
// (there the bound degenerates to a pure mean condition).
double worst_case_quantile(double gamma, DistributionFamily family);

struct WorstCaseAccuracy {
  double gamma = 0.0;
  DistributionFamily family = DistributionFamily::general;
  bool out_of_range = false;  // input ratio outside the invertible range
};

// Inverts worst_case_quantile at the normalized margin ratio
// s = (-b + w^T mu1) / sqrt(w^T sigma1 w). Out-of-range ratios clip to
// [floor, 1 - floor] with the flag set; the symmetric families' plateau
// below s = phi(0.5+) legitimately resolves to gamma = 0.5.
WorstCaseAccuracy worst_case_accuracy(double ratio, DistributionFamily family,
                                      double floor = 1e-6);

WorstCaseAccuracy worst_case_accuracy(const Eigen::VectorXd& w, double b,
                                      const Eigen::VectorXd& mu1,
                                      const Eigen::MatrixXd& sigma1,
                                      DistributionFamily family,
                                      double floor = 1e-6);

struct QqResult {
  // (theoretical standard-normal quantile, sorted sample value) pairs at
  // plotting positions (i - 0.5) / n.
  std::vector<std::pair<double, double>> points;
  double correlation = 0.0;  // Pearson correlation of the pairs, in (0, 1]
};

// Normal-probability-plot data for a margin sample. Throws on fewer than 3
// samples or zero variance.
QqResult normality_qq(const Eigen::VectorXd& margins);

struct DiagonalityStats {
  double mean_abs_diag = 0.0;
  double mean_abs_offdiag = 0.0;
  double ratio = 0.0;  // diag / offdiag; +inf when offdiag is exactly zero
};

// Empirical covariance structure of weak-classifier outputs, row = example.
// Large ratios mean the covariance is close to a scaled identity.
DiagonalityStats covariance_diagonality(const Eigen::MatrixXd& h_outputs);

}  // namespace tcb
