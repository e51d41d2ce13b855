#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "tcb/dataset.hpp"

namespace tcb {

// Threshold classifier on one feature column.
// Output is polarity * sign(value - threshold) with sign(0) = +1.
struct DecisionStump {
  int feature_index = 0;
  double threshold = 0.0;
  int polarity = 1;  // +1 or -1

  int predict(double value) const {
    const int s = value >= threshold ? 1 : -1;
    return polarity * s;
  }

  // One +-1 output per dataset row.
  Eigen::VectorXd evaluate(const RowMatrixXd& features) const;
};

enum class PoolSource { tabular, haar };

// Candidate-feature sampler for stump training. sample_fraction < 1 draws a
// uniform subset without replacement; the subset is re-drawn per query from
// a counter-derived seed, so a training run is reproducible end to end.
class WeakLearnerPool {
 public:
  WeakLearnerPool(PoolSource source = PoolSource::tabular,
                  double sample_fraction = 1.0, std::uint64_t seed = 1234);

  std::vector<int> sample_features(int total_features);

  PoolSource source() const { return source_; }
  double sample_fraction() const { return sample_fraction_; }
  std::uint64_t seed() const { return seed_; }

 private:
  PoolSource source_;
  double sample_fraction_;
  std::uint64_t seed_;
  std::uint64_t queries_ = 0;
};

struct BestStump {
  DecisionStump stump;
  double edge = 0.0;  // sum_i u_i y_i h(x_i) of the winner
};

// Maximizes the weighted edge over sampled features, all midpoint
// thresholds (plus sentinels outside the value range) and both polarities.
// Ties break lexicographically on (feature_index, threshold), polarity +1
// first. Throws if weights are negative or all zero.
BestStump best_stump(WeakLearnerPool& pool, const Dataset& data,
                     const Eigen::VectorXd& weights);

}  // namespace tcb
