#include <doctest.h>

#include <cmath>
#include <random>

#include "tcb/mpm.hpp"
#include "test_util.hpp"

using tcb::DistributionFamily;
using tcb::inverse_normal_cdf;
using tcb::normal_cdf;
using tcb::worst_case_accuracy;
using tcb::worst_case_quantile;

TEST_CASE("inverse normal cdf hits tabulated quantiles") {
  CHECK(std::abs(inverse_normal_cdf(0.5)) < 1e-15);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(inverse_normal_cdf(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-12));
  // round trip across the domain, including the tails
  for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
    CHECK(normal_cdf(inverse_normal_cdf(p)) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), std::invalid_argument);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), std::invalid_argument);
}

TEST_CASE("quantile coefficient fixed points") {
  CHECK(std::abs(worst_case_quantile(0.5, DistributionFamily::gaussian)) <
        1e-12);
  CHECK(worst_case_quantile(0.5, DistributionFamily::general) ==
        doctest::Approx(1.0));
  CHECK(worst_case_quantile(0.9, DistributionFamily::symmetric_unimodal) ==
        doctest::Approx((2.0 / 3.0) * std::sqrt(5.0)).epsilon(1e-12));
  // below one half the symmetric families degrade to the mean condition
  CHECK(worst_case_quantile(0.3, DistributionFamily::symmetric) == 0.0);
  CHECK(worst_case_quantile(0.3, DistributionFamily::symmetric_unimodal) ==
        0.0);
  CHECK_THROWS_AS(worst_case_quantile(0.0, DistributionFamily::general),
                  std::invalid_argument);
  CHECK_THROWS_AS(worst_case_quantile(1.0, DistributionFamily::gaussian),
                  std::invalid_argument);
}

TEST_CASE("family ordering and strict growth above one half") {
  std::mt19937_64 rng(131);
  double prev[4] = {-1, -1, -1, -1};
  bool first = true;
  for (int k = 0; k < 10000; ++k) {
    const double gamma = 0.5 + (k + 0.5) / 10000.0 * 0.4999;
    const double g = worst_case_quantile(gamma, DistributionFamily::general);
    const double s = worst_case_quantile(gamma, DistributionFamily::symmetric);
    const double su =
        worst_case_quantile(gamma, DistributionFamily::symmetric_unimodal);
    const double ga = worst_case_quantile(gamma, DistributionFamily::gaussian);
    REQUIRE(g > s);
    REQUIRE(s > su);
    REQUIRE(su > ga);
    if (!first) {
      REQUIRE(g > prev[0]);
      REQUIRE(s > prev[1]);
      REQUIRE(su > prev[2]);
      REQUIRE(ga > prev[3]);
    }
    prev[0] = g;
    prev[1] = s;
    prev[2] = su;
    prev[3] = ga;
    first = false;
  }
  (void)rng;
}

TEST_CASE("general and gaussian grow over the whole interval") {
  double prev_g = -1e300, prev_n = -1e300;
  for (int k = 1; k < 1000; ++k) {
    const double gamma = k / 1000.0;
    const double g = worst_case_quantile(gamma, DistributionFamily::general);
    const double n = worst_case_quantile(gamma, DistributionFamily::gaussian);
    REQUIRE(g > prev_g);
    REQUIRE(n > prev_n);
    prev_g = g;
    prev_n = n;
  }
}

TEST_CASE("worst-case accuracy recovery") {
  CHECK(worst_case_accuracy(0.0, DistributionFamily::gaussian).gamma ==
        doctest::Approx(0.5));
  CHECK(worst_case_accuracy(1.0, DistributionFamily::general).gamma ==
        doctest::Approx(0.5));

  // one fixed margin ratio, four families, accuracy strictly ordered
  const double s = 1.2;
  const double g_gnrl =
      worst_case_accuracy(s, DistributionFamily::general).gamma;
  const double g_s = worst_case_accuracy(s, DistributionFamily::symmetric).gamma;
  const double g_su =
      worst_case_accuracy(s, DistributionFamily::symmetric_unimodal).gamma;
  const double g_ga = worst_case_accuracy(s, DistributionFamily::gaussian).gamma;
  CHECK(g_gnrl < g_s);
  CHECK(g_s < g_su);
  CHECK(g_su < g_ga);
  CHECK(g_gnrl == doctest::Approx(1.44 / 2.44).epsilon(1e-12));
  CHECK(g_ga == doctest::Approx(normal_cdf(1.2)).epsilon(1e-12));
}

TEST_CASE("out-of-range ratios clip with a flag") {
  const auto neg = worst_case_accuracy(-0.5, DistributionFamily::general);
  CHECK(neg.out_of_range);
  CHECK(neg.gamma == doctest::Approx(1e-6));
  const auto zero = worst_case_accuracy(0.0, DistributionFamily::general);
  CHECK(zero.out_of_range);
  // the symmetric plateau is a legitimate answer, not an error
  const auto plateau = worst_case_accuracy(0.3, DistributionFamily::symmetric);
  CHECK(!plateau.out_of_range);
  CHECK(plateau.gamma == doctest::Approx(0.5));
}

TEST_CASE("quantile and accuracy recovery round trip") {
  struct Probe {
    DistributionFamily family;
    double lo, hi;
  };
  const Probe probes[] = {
      {DistributionFamily::general, 0.05, 10.0},
      {DistributionFamily::symmetric, 1.01, 10.0},
      {DistributionFamily::symmetric_unimodal, 0.68, 10.0},
      {DistributionFamily::gaussian, -4.0, 4.0},
  };
  std::mt19937_64 rng(137);
  for (const Probe& probe : probes) {
    for (int k = 0; k < 200; ++k) {
      const double s = tcbtest::uniform(rng, probe.lo, probe.hi);
      const auto acc = worst_case_accuracy(s, probe.family);
      REQUIRE(!acc.out_of_range);
      CHECK(worst_case_quantile(acc.gamma, probe.family) ==
            doctest::Approx(s).epsilon(1e-9));
    }
  }
}

TEST_CASE("vector form normalizes by the projected deviation") {
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  Eigen::VectorXd mu(2);
  mu << 1.0, 0.5;
  Eigen::MatrixXd sigma(2, 2);
  sigma << 0.5, 0.0, 0.0, 0.5;
  // s = (mu sum - b) / sqrt(1) = 1.5 - b
  const auto acc =
      worst_case_accuracy(w, 0.5, mu, sigma, DistributionFamily::gaussian);
  CHECK(acc.gamma == doctest::Approx(normal_cdf(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(worst_case_accuracy(w, 0.0, mu,
                                      Eigen::MatrixXd::Zero(2, 2),
                                      DistributionFamily::gaussian),
                  std::invalid_argument);
}

TEST_CASE("qq correlation is one on exact normal quantiles") {
  const int n = 500;
  Eigen::VectorXd margins(n);
  for (int i = 0; i < n; ++i)
    margins[i] = inverse_normal_cdf((i + 0.5) / n) * 2.3 + 0.7;
  const auto res = tcb::normality_qq(margins);
  CHECK(res.correlation == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.points.size() == static_cast<std::size_t>(n));
}

TEST_CASE("two-point mixtures score lower than gaussian samples") {
  std::mt19937_64 rng(139);
  const int n = 2000;
  Eigen::VectorXd mixture(n), gauss(n);
  for (int i = 0; i < n; ++i) {
    mixture[i] = (rng() % 2 == 0 ? 1.0 : -1.0) + 0.01 * tcbtest::gaussian(rng);
    gauss[i] = tcbtest::gaussian(rng);
  }
  const double mix_corr = tcb::normality_qq(mixture).correlation;
  const double gauss_corr = tcb::normality_qq(gauss).correlation;
  CHECK(mix_corr < gauss_corr);
  CHECK(gauss_corr > 0.999);  // 10^4-scale gaussian samples sit on the line
}

TEST_CASE("qq input validation") {
  Eigen::VectorXd two(2);
  two << 0.0, 1.0;
  CHECK_THROWS_AS(tcb::normality_qq(two), std::invalid_argument);
  CHECK_THROWS_AS(tcb::normality_qq(Eigen::VectorXd::Constant(10, 3.0)),
                  std::invalid_argument);
}

TEST_CASE("independent balanced columns have a diagonal covariance") {
  std::mt19937_64 rng(149);
  const int m = 4000, n = 12;
  Eigen::MatrixXd h(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = rng() % 2 == 0 ? 1.0 : -1.0;
  const auto stats = tcb::covariance_diagonality(h);
  CHECK(stats.mean_abs_diag == doctest::Approx(1.0).epsilon(0.05));
  CHECK(stats.mean_abs_offdiag < 0.05);
  CHECK(stats.ratio > 5.0);
}

TEST_CASE("duplicated columns are fully correlated") {
  std::mt19937_64 rng(151);
  const int m = 500;
  Eigen::MatrixXd h(m, 2);
  for (int i = 0; i < m; ++i) {
    h(i, 0) = rng() % 2 == 0 ? 1.0 : -1.0;
    h(i, 1) = h(i, 0);
  }
  const auto stats = tcb::covariance_diagonality(h);
  CHECK(stats.ratio == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("diagonality is invariant under column permutation") {
  std::mt19937_64 rng(157);
  Eigen::MatrixXd h(300, 5);
  for (int i = 0; i < 300; ++i)
    for (int j = 0; j < 5; ++j) h(i, j) = tcbtest::gaussian(rng);
  const auto base = tcb::covariance_diagonality(h);
  Eigen::MatrixXd permuted(300, 5);
  const int perm[5] = {3, 0, 4, 1, 2};
  for (int j = 0; j < 5; ++j) permuted.col(j) = h.col(perm[j]);
  const auto shuffled = tcb::covariance_diagonality(permuted);
  CHECK(base.mean_abs_diag == doctest::Approx(shuffled.mean_abs_diag));
  CHECK(base.mean_abs_offdiag == doctest::Approx(shuffled.mean_abs_offdiag));
  CHECK(base.ratio == doctest::Approx(shuffled.ratio));
}

TEST_CASE("degenerate diagonality inputs throw") {
  CHECK_THROWS_AS(tcb::covariance_diagonality(Eigen::MatrixXd::Ones(1, 5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(tcb::covariance_diagonality(Eigen::MatrixXd::Ones(10, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(tcb::covariance_diagonality(Eigen::MatrixXd::Ones(10, 5)),
                  std::invalid_argument);
}
