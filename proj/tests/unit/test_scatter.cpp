#include <doctest.h>

#include <random>

#include "tcb/scatter.hpp"
#include "test_util.hpp"

using tcb::ScatterMatrix;
using tcb::ScatterMode;

namespace {

// Independent oracle: rho^T Q rho via the pairwise within-class difference
// sums, one block at a time.
double pairwise_quadratic(const Eigen::VectorXd& rho, Eigen::Index m1,
                          Eigen::Index m2, ScatterMode mode) {
  const double m = static_cast<double>(m1 + m2);
  auto block_sum = [&](Eigen::Index start, Eigen::Index len) {
    double s = 0.0;
    for (Eigen::Index i = start; i < start + len; ++i)
      for (Eigen::Index k = start; k < i; ++k) {
        const double d = rho[i] - rho[k];
        s += d * d;
      }
    return s / (m * static_cast<double>(len - 1));
  };
  double val = block_sum(0, m1);
  if (mode == ScatterMode::lda) val += block_sum(m1, m2);
  return val;
}

Eigen::MatrixXd materialize(const ScatterMatrix& q) {
  const Eigen::Index m = q.size();
  Eigen::MatrixXd dense(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    dense.col(j) = q.apply(Eigen::VectorXd::Unit(m, j));
  return dense;
}

}  // namespace

TEST_CASE("exact block entries for the 2+2 case") {
  const auto q = ScatterMatrix::build(2, 2, ScatterMode::lda, true);
  const Eigen::MatrixXd dense = materialize(q);
  Eigen::MatrixXd expected(4, 4);
  expected << 0.25, -0.25, 0, 0,  //
      -0.25, 0.25, 0, 0,          //
      0, 0, 0.25, -0.25,          //
      0, 0, -0.25, 0.25;
  CHECK((dense - expected).cwiseAbs().maxCoeff() < 1e-15);

  const auto lac = ScatterMatrix::build(2, 2, ScatterMode::lac, true);
  const Eigen::MatrixXd lac_dense = materialize(lac);
  CHECK((lac_dense.topLeftCorner(2, 2) - expected.topLeftCorner(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-15);
  CHECK(lac_dense.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("diagonal approximation is identity over m") {
  const auto q = ScatterMatrix::build(1000, 1000, ScatterMode::lda, false);
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(2000, -1.0, 1.0);
  CHECK((q.apply(v) - v / 2000.0).cwiseAbs().maxCoeff() < 1e-15);

  const auto lac = ScatterMatrix::build(1000, 1000, ScatterMode::lac, false);
  const Eigen::VectorXd qv = lac.apply(v);
  CHECK((qv.head(1000) - v.head(1000) / 2000.0).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(qv.tail(1000).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("degenerate classes are rejected in exact mode") {
  CHECK_THROWS_AS(ScatterMatrix::build(1, 5, ScatterMode::lac, true),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScatterMatrix::build(5, 1, ScatterMode::lda, true),
                  std::invalid_argument);
  // lac ignores the negative block, so a singleton negative class is fine.
  CHECK_NOTHROW(ScatterMatrix::build(5, 1, ScatterMode::lac, true));
  CHECK_NOTHROW(ScatterMatrix::build(1, 5, ScatterMode::lda, false));
}

TEST_CASE("quadratic form on hand-computed vectors") {
  const auto q = ScatterMatrix::build(2, 2, ScatterMode::lda, true);

  Eigen::VectorXd constant_blocks(4);
  constant_blocks << 3.0, 3.0, -7.0, -7.0;
  CHECK(q.quadratic_form(constant_blocks) == 0.0);

  Eigen::VectorXd rho(4);
  rho << 1.0, -1.0, 0.0, 0.0;
  CHECK(q.quadratic_form(rho) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("quadratic form matches the pairwise oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m1 = 2 + static_cast<Eigen::Index>(rng() % 40);
    const Eigen::Index m2 = 2 + static_cast<Eigen::Index>(rng() % 40);
    const auto mode = trial % 2 == 0 ? ScatterMode::lda : ScatterMode::lac;
    const auto q = ScatterMatrix::build(m1, m2, mode, true);
    const Eigen::VectorXd rho = tcbtest::random_vector(m1 + m2, rng);
    const double fast = q.quadratic_form(rho);
    const double slow = pairwise_quadratic(rho, m1, m2, mode);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
  }
}

TEST_CASE("block rows sum to zero and the operator is psd") {
  std::mt19937_64 rng(11);
  const auto q = ScatterMatrix::build(17, 23, ScatterMode::lda, true);

  Eigen::VectorXd ones_pos = Eigen::VectorXd::Zero(40);
  ones_pos.head(17).setOnes();
  CHECK(q.apply(ones_pos).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::VectorXd ones_neg = Eigen::VectorXd::Zero(40);
  ones_neg.tail(23).setOnes();
  CHECK(q.apply(ones_neg).cwiseAbs().maxCoeff() < 1e-12);

  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd v = tcbtest::random_vector(40, rng);
    CHECK(v.dot(q.apply(v)) >= -1e-10);
  }
}

TEST_CASE("regularized solve inverts Q + delta I") {
  std::mt19937_64 rng(13);
  for (const auto mode : {ScatterMode::lda, ScatterMode::lac}) {
    const auto q = ScatterMatrix::build(9, 14, mode, true, 1e-6);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd v = tcbtest::random_vector(23, rng);
      const Eigen::VectorXd x = q.solve_regularized(v);
      const Eigen::VectorXd back = q.apply(x) + 1e-6 * x;
      CHECK((back - v).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("lda equals lac plus the negative block") {
  std::mt19937_64 rng(17);
  const auto lda = ScatterMatrix::build(8, 12, ScatterMode::lda, true);
  const auto lac = ScatterMatrix::build(8, 12, ScatterMode::lac, true);
  // Zero negative block makes the two modes agree everywhere.
  Eigen::VectorXd rho = Eigen::VectorXd::Zero(20);
  rho.head(8) = tcbtest::random_vector(8, rng);
  CHECK((lda.apply(rho) - lac.apply(rho)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lda.quadratic_form(rho) == lac.quadratic_form(rho));
}

TEST_CASE("dimension mismatches throw") {
  const auto q = ScatterMatrix::build(3, 3, ScatterMode::lda, true);
  CHECK_THROWS_AS(q.quadratic_form(Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(q.apply(Eigen::VectorXd::Zero(7)), std::invalid_argument);
}
