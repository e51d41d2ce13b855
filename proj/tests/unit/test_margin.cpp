#include <doctest.h>

#include <array>

#include "tcb/margin.hpp"

using tcb::Dataset;
using tcb::DecisionStump;
using tcb::MarginMatrix;

namespace {

Dataset tiny(std::initializer_list<int> labels,
             std::initializer_list<double> feature0) {
  tcb::RowMatrixXd f(static_cast<Eigen::Index>(feature0.size()), 1);
  Eigen::VectorXi l(static_cast<Eigen::Index>(labels.size()));
  Eigen::Index i = 0;
  for (double v : feature0) f(i++, 0) = v;
  i = 0;
  for (int v : labels) l[i++] = v;
  return Dataset::sorted(std::move(f), std::move(l));
}

}  // namespace

TEST_CASE("single-entry margin matrices") {
  // One positive row means the negative class is missing, so build a 1+1
  // dataset and read the entries individually.
  const Dataset data = tiny({1, -1}, {5.0, 5.0});
  const DecisionStump always_positive{0, 0.0, 1};  // predicts +1 on value 5
  const std::array<DecisionStump, 1> stumps{always_positive};
  const MarginMatrix a = MarginMatrix::build(data, stumps);
  CHECK(a.matrix()(0, 0) == 1.0);   // y = +1, h = +1
  CHECK(a.matrix()(1, 0) == -1.0);  // y = -1, h = +1
}

TEST_CASE("4-point toy set against hand evaluation") {
  const Dataset data = tiny({1, 1, -1, -1}, {2.0, 0.5, -0.5, -2.0});
  const DecisionStump stump{0, 1.0, 1};  // +1 iff value >= 1
  const std::array<DecisionStump, 1> stumps{stump};
  const MarginMatrix a = MarginMatrix::build(data, stumps);
  // h = (+1, -1, -1, -1), y = (+1, +1, -1, -1)
  Eigen::Vector4d expected(1.0, -1.0, 1.0, 1.0);
  CHECK((a.matrix().col(0) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("negating a weak classifier negates its column exactly") {
  const Dataset data = tiny({1, 1, -1, -1}, {0.3, -1.2, 0.8, -0.1});
  const DecisionStump stump{0, 0.0, 1};
  const DecisionStump negated{0, 0.0, -1};
  const Eigen::VectorXd col = MarginMatrix::margin_column(data, stump);
  const Eigen::VectorXd neg = MarginMatrix::margin_column(data, negated);
  CHECK((col + neg).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("incremental build appends one column per classifier") {
  const Dataset data = tiny({1, 1, -1, -1}, {2.0, 0.5, -0.5, -2.0});
  const std::array<DecisionStump, 3> stumps{DecisionStump{0, 1.0, 1},
                                            DecisionStump{0, 0.0, 1},
                                            DecisionStump{0, -1.0, -1}};
  const MarginMatrix batch = MarginMatrix::build(data, stumps);

  MarginMatrix incremental(data.rows());
  for (const DecisionStump& s : stumps) {
    const Eigen::Index before = incremental.cols();
    incremental.append_column(MarginMatrix::margin_column(data, s));
    CHECK(incremental.cols() == before + 1);
  }
  CHECK((batch.matrix() - incremental.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("margins are A w") {
  const Dataset data = tiny({1, 1, -1, -1}, {2.0, 0.5, -0.5, -2.0});
  const std::array<DecisionStump, 2> stumps{DecisionStump{0, 1.0, 1},
                                            DecisionStump{0, 0.0, 1}};
  const MarginMatrix a = MarginMatrix::build(data, stumps);
  const Eigen::Vector2d w(0.25, 0.75);
  const Eigen::VectorXd rho = a.margins(w);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const double h0 = stumps[0].predict(data.features(i, 0));
    const double h1 = stumps[1].predict(data.features(i, 0));
    CHECK(rho[i] ==
          doctest::Approx(data.labels[i] * (0.25 * h0 + 0.75 * h1)));
  }
}

TEST_CASE("bad inputs are rejected") {
  const Dataset data = tiny({1, -1}, {1.0, -1.0});
  CHECK_THROWS_AS(MarginMatrix::build(data, {}), std::invalid_argument);

  MarginMatrix a(2);
  CHECK_THROWS_AS(a.append_column(Eigen::Vector3d(1, 1, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(a.append_column(Eigen::Vector2d(1.0, 0.5)),
                  std::invalid_argument);
}
