#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "tcb/booster.hpp"
#include "tcb/dataset.hpp"
#include "tcb/haar.hpp"
#include "tcb/stumps.hpp"

namespace tcb {

struct NodeTargets {
  double d_min = 0.995;      // minimum detection rate per node
  double f_max = 0.5;        // maximum false-positive rate per node
  double overall_fp = 1e-3;  // stop once the cumulative fp rate is below this

  void validate() const;
};

// Exit t reuses every weak classifier selected up to that point: its
// coefficient vector spans the first n_t entries of the shared pool.
struct CascadeExit {
  Eigen::Index n_t = 0;
  Eigen::VectorXd w;
  double b = 0.0;
};

struct CascadeModel {
  std::vector<CascadeExit> exits;
  std::vector<DecisionStump> classifiers;  // shared, in selection order
  int lac_start_node = 3;
  NodeTargets targets;

  // Stump outputs for every example row, one column per shared classifier.
  Eigen::MatrixXd weak_outputs(const RowMatrixXd& features) const;
  // Scores of exit t (0-based) given precomputed weak outputs.
  Eigen::VectorXd exit_scores(std::size_t t,
                              const Eigen::MatrixXd& outputs) const;
  StrongClassifier exit_classifier(std::size_t t) const;

  // Index of the first rejecting exit per example, or -1 if accepted by all.
  Eigen::VectorXi first_rejection(const RowMatrixXd& features) const;
  bool accepts(const Eigen::RowVectorXd& features_row) const;
};

// Source of candidate negative feature rows. Candidates are raw; the
// trainer keeps only those the current cascade still accepts, which is what
// makes them bootstrapped negatives.
class NegativePool {
 public:
  virtual ~NegativePool() = default;
  virtual std::optional<Eigen::RowVectorXd> draw() = 0;
  std::int64_t consumed() const { return consumed_; }

 protected:
  std::int64_t consumed_ = 0;
};

class SyntheticNegativePool final : public NegativePool {
 public:
  using Generator = std::function<Eigen::RowVectorXd(std::mt19937_64&)>;

  SyntheticNegativePool(Generator generator, std::uint64_t seed,
                        std::int64_t max_draws);
  std::optional<Eigen::RowVectorXd> draw() override;

 private:
  Generator generator_;
  std::mt19937_64 rng_;
  std::int64_t max_draws_;
};

// Random window crops from background images, featurized through a fixed
// Haar feature list.
class ImageNegativePool final : public NegativePool {
 public:
  ImageNegativePool(std::vector<Eigen::MatrixXd> backgrounds,
                    std::vector<HaarFeature> features, int win_w, int win_h,
                    std::uint64_t seed, std::int64_t max_draws);
  std::optional<Eigen::RowVectorXd> draw() override;

 private:
  std::vector<Eigen::MatrixXd> backgrounds_;
  std::vector<HaarFeature> features_;
  int win_w_, win_h_;
  std::mt19937_64 rng_;
  std::int64_t max_draws_;
};

struct CascadeConfig {
  BoosterConfig booster;
  NodeTargets targets;
  int lac_start_node = 3;  // 1-based node index where booster.mode applies;
                           // earlier nodes train with the fisher objective
  std::vector<int> node_budgets = {4, 4, 4, 8, 8, 16};  // extended by
                                                        // doubling every
                                                        // second node
  int max_nodes = 50;
  Eigen::Index negatives_per_node = 200;  // bootstrap refill size
  double pool_sample_fraction = 1.0;      // stump candidate subsampling
  std::uint64_t pool_seed = 1234;

  int budget_for_node(int node) const;  // 1-based
};

struct NodeReport {
  int node = 0;
  Eigen::Index n_t = 0;
  int added = 0;
  double detection = 0.0;
  double fp = 0.0;
  double cum_detection = 1.0;
  double cum_fp = 1.0;
};

struct CascadeTrainResult {
  CascadeModel model;
  std::vector<NodeReport> nodes;
  bool reached_target = false;
  bool pool_exhausted = false;
  bool node_budget_exceeded = false;
  // Negatives accepted into the training set after each node, for auditing
  // the bootstrap invariant.
  std::vector<RowMatrixXd> bootstrap_audit;
};

CascadeTrainResult train_cascade(const RowMatrixXd& positives,
                                 NegativePool& pool,
                                 const CascadeConfig& config);

// Product composition of per-node rates: (prod d, prod f).
std::pair<double, double> compose_rates(const std::vector<double>& d,
                                        const std::vector<double>& f);

// (detection rate, false-positive rate) of one exit on a two-class dataset;
// accepted means score >= b.
std::pair<double, double> evaluate_node(const StrongClassifier& exit,
                                        const Dataset& data);

struct RocPoint {
  std::int64_t fp_count = 0;
  double detection_rate = 0.0;
};

// Full-cascade operating points swept over final-exit offsets, sorted by
// false-positive count ascending.
std::vector<RocPoint> evaluate_cascade_roc(const CascadeModel& model,
                                           const Dataset& data,
                                           const std::vector<double>& sweep);

}  // namespace tcb
