#include <doctest.h>

#include <random>

#include "tcb/cascade.hpp"
#include "test_util.hpp"

using tcb::CascadeConfig;
using tcb::CascadeModel;
using tcb::CascadeTrainResult;
using tcb::Dataset;
using tcb::NodeTargets;
using tcb::RocPoint;
using tcb::StrongClassifier;
using tcb::SyntheticNegativePool;

namespace {

// Positives clustered around +1.2 in every coordinate, negatives drawn
// uniformly from a box. Every node can cut roughly half the noise while
// keeping nearly all positives.
tcb::RowMatrixXd cluster_positives(Eigen::Index count, Eigen::Index dims,
                                   std::mt19937_64& rng) {
  tcb::RowMatrixXd rows(count, dims);
  for (Eigen::Index i = 0; i < count; ++i)
    for (Eigen::Index j = 0; j < dims; ++j)
      rows(i, j) = 1.2 + 0.5 * tcbtest::gaussian(rng);
  return rows;
}

SyntheticNegativePool::Generator uniform_box(Eigen::Index dims) {
  return [dims](std::mt19937_64& rng) {
    Eigen::RowVectorXd row(dims);
    for (Eigen::Index j = 0; j < dims; ++j)
      row[j] = tcbtest::uniform(rng, -3.0, 3.0);
    return row;
  };
}

CascadeConfig desk_config() {
  CascadeConfig config;
  config.targets = {0.95, 0.5, 1e-3};
  config.lac_start_node = 2;
  config.node_budgets = {6, 6, 6, 8, 8, 12};
  config.negatives_per_node = 150;
  config.booster.theta = 1.0 / 15;
  config.booster.n_max = 200;
  return config;
}

}  // namespace

TEST_CASE("rate composition of the canonical 20-node design") {
  const std::vector<double> d(20, 0.997);
  const std::vector<double> f(20, 0.5);
  const auto [fdr, ffp] = tcb::compose_rates(d, f);
  CHECK(fdr >= 0.941);
  CHECK(fdr <= 0.942);
  CHECK(ffp >= 9.5e-7);
  CHECK(ffp <= 9.6e-7);
}

TEST_CASE("single node composition is the identity") {
  const auto [fdr, ffp] = tcb::compose_rates({0.83}, {0.41});
  CHECK(fdr == 0.83);
  CHECK(ffp == 0.41);
}

TEST_CASE("perfect nodes contribute factor one") {
  const auto [fdr, ffp] = tcb::compose_rates({1.0, 0.9}, {1.0, 0.3});
  CHECK(fdr == doctest::Approx(0.9));
  CHECK(ffp == doctest::Approx(0.3));
}

TEST_CASE("rate validation") {
  CHECK_THROWS_AS(tcb::compose_rates({}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(tcb::compose_rates({0.5}, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(tcb::compose_rates({1.5}, {0.5}), std::invalid_argument);
}

TEST_CASE("node evaluation on hand-made scores") {
  StrongClassifier sc;
  sc.weak_classifiers = {{0, 0.0, 1}};
  sc.w = Eigen::VectorXd::Ones(1);
  sc.b = 0.0;

  tcb::RowMatrixXd f(4, 1);
  f << 1.0, 2.0, -1.0, -2.0;
  Eigen::VectorXi l(4);
  l << 1, 1, -1, -1;
  const Dataset data = Dataset::sorted(f, l);

  auto [det, fp] = tcb::evaluate_node(sc, data);
  CHECK(det == 1.0);
  CHECK(fp == 0.0);

  sc.b = 2.0;  // above every score
  auto [det2, fp2] = tcb::evaluate_node(sc, data);
  CHECK(det2 == 0.0);
  CHECK(fp2 == 0.0);
}

TEST_CASE("node evaluation matches a manual count") {
  std::mt19937_64 rng(163);
  const Dataset data = tcbtest::random_dataset(5, 5, 1, rng, 0.8);
  StrongClassifier sc;
  sc.weak_classifiers = {{0, 0.2, 1}};
  sc.w = Eigen::VectorXd::Ones(1);
  sc.b = 0.5;

  double det_manual = 0, fp_manual = 0;
  for (Eigen::Index i = 0; i < 10; ++i) {
    const double score = sc.w[0] * sc.weak_classifiers[0].predict(
                                       data.features(i, 0));
    const bool accepted = score >= sc.b;
    if (data.labels[i] == 1)
      det_manual += accepted;
    else
      fp_manual += accepted;
  }
  const auto [det, fp] = tcb::evaluate_node(sc, data);
  CHECK(det == det_manual / 5.0);
  CHECK(fp == fp_manual / 5.0);
}

TEST_CASE("trivially separable data needs one node and one stump") {
  std::mt19937_64 rng(167);
  tcb::RowMatrixXd positives(40, 1);
  for (Eigen::Index i = 0; i < 40; ++i)
    positives(i, 0) = tcbtest::uniform(rng, 1.0, 2.0);
  SyntheticNegativePool pool(
      [](std::mt19937_64& r) {
        Eigen::RowVectorXd row(1);
        row[0] = tcbtest::uniform(r, -2.0, -1.0);
        return row;
      },
      7, 100000);

  CascadeConfig config = desk_config();
  config.targets = {0.99, 0.5, 0.01};
  config.negatives_per_node = 40;
  const CascadeTrainResult result = tcb::train_cascade(positives, pool, config);
  CHECK(result.reached_target);
  CHECK(result.model.exits.size() == 1);
  CHECK(result.model.classifiers.size() == 1);
  CHECK(result.nodes[0].fp == 0.0);
}

TEST_CASE("three-node run keeps the bootstrap invariant and node targets") {
  std::mt19937_64 rng(173);
  const tcb::RowMatrixXd positives = cluster_positives(80, 3, rng);
  SyntheticNegativePool pool(uniform_box(3), 11, 2000000);

  CascadeConfig config = desk_config();
  config.max_nodes = 3;
  config.targets.overall_fp = 1e-6;  // unreachable in three nodes
  const CascadeTrainResult result = tcb::train_cascade(positives, pool, config);
  REQUIRE(result.model.exits.size() == 3);
  REQUIRE(result.bootstrap_audit.size() >= 3);
  CHECK(!result.node_budget_exceeded);

  // Every bootstrapped negative passed every exit trained at sampling time.
  for (std::size_t batch = 1; batch < result.bootstrap_audit.size(); ++batch) {
    const tcb::RowMatrixXd& rows = result.bootstrap_audit[batch];
    CascadeModel prefix = result.model;
    prefix.exits.resize(batch);  // exits trained when batch was drawn
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
      REQUIRE(prefix.accepts(rows.row(i)));
  }

  // Exits reuse all previously selected classifiers.
  for (std::size_t t = 1; t < result.model.exits.size(); ++t)
    CHECK(result.model.exits[t].n_t >= result.model.exits[t - 1].n_t);

  // Training-time node rates meet the targets.
  for (const auto& node : result.nodes) {
    CHECK(node.detection >= config.targets.d_min);
    CHECK(node.fp <= config.targets.f_max + 1e-12);
  }
}

TEST_CASE("rejection at an early exit is final") {
  std::mt19937_64 rng(179);
  const tcb::RowMatrixXd positives = cluster_positives(60, 3, rng);
  SyntheticNegativePool pool(uniform_box(3), 13, 2000000);
  CascadeConfig config = desk_config();
  config.max_nodes = 2;
  config.targets.overall_fp = 1e-6;
  const CascadeTrainResult result = tcb::train_cascade(positives, pool, config);
  REQUIRE(result.model.exits.size() == 2);

  tcb::RowMatrixXd probes(200, 3);
  for (Eigen::Index i = 0; i < 200; ++i)
    for (Eigen::Index j = 0; j < 3; ++j)
      probes(i, j) = tcbtest::uniform(rng, -3.0, 3.0);

  const Eigen::VectorXi rejection = result.model.first_rejection(probes);
  // Anything rejected at exit 0 stays rejected no matter what later exits
  // would have said: make the later exit accept everything and re-check.
  CascadeModel lenient = result.model;
  lenient.exits[1].b = -1e9;
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    if (rejection[i] == 0) CHECK(!lenient.accepts(probes.row(i)));
  }
}

TEST_CASE("roc sweep matches a per-example simulation oracle") {
  std::mt19937_64 rng(181);
  const tcb::RowMatrixXd positives = cluster_positives(50, 3, rng);
  SyntheticNegativePool pool(uniform_box(3), 17, 2000000);
  CascadeConfig config = desk_config();
  config.max_nodes = 2;
  config.targets.overall_fp = 1e-6;
  const CascadeTrainResult trained = tcb::train_cascade(positives, pool, config);
  REQUIRE(trained.model.exits.size() == 2);
  const CascadeModel& model = trained.model;

  const Dataset data = tcbtest::random_dataset(60, 120, 3, rng, 1.0);
  const double b_last = model.exits.back().b;
  const std::vector<double> sweep{b_last - 0.4, b_last, b_last + 0.4};
  const std::vector<RocPoint> points =
      tcb::evaluate_cascade_roc(model, data, sweep);
  REQUIRE(points.size() == 3);

  // Oracle: simulate each offset example by example.
  for (double offset : sweep) {
    std::int64_t fp = 0, det = 0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      bool ok = true;
      for (std::size_t t = 0; t < model.exits.size() && ok; ++t) {
        const StrongClassifier sc = model.exit_classifier(t);
        const double score = sc.scores(data.features.row(i))[0];
        const double b = t + 1 == model.exits.size() ? offset : sc.b;
        ok = score >= b;
      }
      if (!ok) continue;
      if (data.labels[i] == 1)
        ++det;
      else
        ++fp;
    }
    const double det_rate = static_cast<double>(det) / data.m1;
    bool matched = false;
    for (const RocPoint& p : points)
      matched |= p.fp_count == fp && p.detection_rate == det_rate;
    CHECK(matched);
  }

  // Step function: detection never decreases as fp grows.
  for (std::size_t k = 1; k < points.size(); ++k) {
    CHECK(points[k].fp_count >= points[k - 1].fp_count);
    CHECK(points[k].detection_rate >= points[k - 1].detection_rate);
  }

  // Sweeping only the trained offset reproduces the training operating point.
  const auto single = tcb::evaluate_cascade_roc(model, data, {b_last});
  REQUIRE(single.size() == 1);
  bool found = false;
  for (const RocPoint& p : points)
    found |= p.fp_count == single[0].fp_count &&
             p.detection_rate == single[0].detection_rate;
  CHECK(found);

  // An accept-all final offset leaves detection limited by earlier exits.
  const auto open = tcb::evaluate_cascade_roc(model, data, {-1e9});
  CascadeModel prefix_only = model;
  prefix_only.exits.pop_back();
  std::int64_t prefix_det = 0;
  const Eigen::VectorXi rej = prefix_only.first_rejection(data.features);
  for (Eigen::Index i = 0; i < data.m1; ++i) prefix_det += rej[i] < 0;
  CHECK(open[0].detection_rate ==
        doctest::Approx(static_cast<double>(prefix_det) / data.m1));
}

TEST_CASE("pool exhaustion stops training with the flag set") {
  std::mt19937_64 rng(191);
  const tcb::RowMatrixXd positives = cluster_positives(30, 3, rng);
  SyntheticNegativePool pool(uniform_box(3), 19, 180);  // runs dry quickly
  CascadeConfig config = desk_config();
  config.negatives_per_node = 150;
  config.targets.overall_fp = 1e-8;
  const CascadeTrainResult result = tcb::train_cascade(positives, pool, config);
  CHECK(result.pool_exhausted);
  CHECK(!result.reached_target);
}

TEST_CASE("composition matches an independent-node simulation") {
  const std::vector<double> d{0.99, 0.97, 0.995, 0.98, 0.96};
  const std::vector<double> f{0.70, 0.65, 0.75, 0.60, 0.70};
  const auto [fdr, ffp] = tcb::compose_rates(d, f);

  std::mt19937_64 rng(193);
  const int samples = 200000;
  int accepted_pos = 0, accepted_neg = 0;
  for (int s = 0; s < samples; ++s) {
    bool pos_ok = true, neg_ok = true;
    for (std::size_t t = 0; t < d.size(); ++t) {
      if (tcbtest::uniform01(rng) > d[t]) pos_ok = false;
      if (tcbtest::uniform01(rng) > f[t]) neg_ok = false;
    }
    accepted_pos += pos_ok;
    accepted_neg += neg_ok;
  }
  const double sim_dr = static_cast<double>(accepted_pos) / samples;
  const double sim_fp = static_cast<double>(accepted_neg) / samples;
  CHECK(std::abs(sim_dr - fdr) / fdr < 0.02);
  CHECK(std::abs(sim_fp - ffp) / ffp < 0.02);
}

TEST_CASE("targets and budgets validate") {
  NodeTargets bad{0.0, 0.5, 1e-3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  NodeTargets bad2{0.9, 1.0, 1e-3};
  CHECK_THROWS_AS(bad2.validate(), std::invalid_argument);
  NodeTargets good{0.99, 0.5, 1e-6};
  CHECK_NOTHROW(good.validate());

  CascadeConfig config = desk_config();
  CHECK(config.budget_for_node(1) == 6);
  CHECK(config.budget_for_node(6) == 12);
  CHECK(config.budget_for_node(7) >= 12);   // schedule keeps growing
  CHECK(config.budget_for_node(9) > config.budget_for_node(7));
  CHECK_THROWS_AS(config.budget_for_node(0), std::invalid_argument);
}
