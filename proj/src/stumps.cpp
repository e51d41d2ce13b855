#include "tcb/stumps.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>

namespace tcb {

Eigen::VectorXd DecisionStump::evaluate(const RowMatrixXd& features) const {
  if (feature_index < 0 || feature_index >= features.cols())
    throw std::invalid_argument("stump: feature index out of range");
  Eigen::VectorXd out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out[i] = predict(features(i, feature_index));
  return out;
}

WeakLearnerPool::WeakLearnerPool(PoolSource source, double sample_fraction,
                                 std::uint64_t seed)
    : source_(source), sample_fraction_(sample_fraction), seed_(seed) {
  if (sample_fraction_ <= 0.0 || sample_fraction_ > 1.0)
    throw std::invalid_argument("pool: sample_fraction must be in (0, 1]");
}

std::vector<int> WeakLearnerPool::sample_features(int total_features) {
  if (total_features <= 0)
    throw std::invalid_argument("pool: no features to sample from");
  const std::uint64_t query = queries_++;
  std::vector<int> all(static_cast<std::size_t>(total_features));
  std::iota(all.begin(), all.end(), 0);
  if (sample_fraction_ >= 1.0) return all;

  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(sample_fraction_ * total_features));
  std::mt19937_64 rng(seed_ ^ (0x9e3779b97f4a7c15ULL * (query + 1)));
  // Partial Fisher-Yates: first `count` entries become the sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

namespace {

struct FeatureScan {
  double best_edge = -std::numeric_limits<double>::infinity();
  double threshold = 0.0;
  int polarity = 1;
};

// Sweeps thresholds over one sorted feature column. edge(+1 polarity, t)
// = total - 2 * sum of u_i y_i over values below t; descending prefix over
// midpoints, with sentinels one unit outside the value range.
FeatureScan scan_feature(const std::vector<std::pair<double, double>>& sorted,
                         double total) {
  FeatureScan best;
  auto consider = [&](double threshold, double edge_pos) {
    for (int polarity : {1, -1}) {
      const double edge = polarity > 0 ? edge_pos : -edge_pos;
      if (edge > best.best_edge) {
        best = {edge, threshold, polarity};
      }
    }
  };

  consider(sorted.front().first - 1.0, total);
  double below = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    below += sorted[i].second;
    if (i + 1 < sorted.size() && sorted[i + 1].first > sorted[i].first)
      consider(0.5 * (sorted[i].first + sorted[i + 1].first),
               total - 2.0 * below);
  }
  consider(sorted.back().first + 1.0, total - 2.0 * below);
  return best;
}

}  // namespace

BestStump best_stump(WeakLearnerPool& pool, const Dataset& data,
                     const Eigen::VectorXd& weights) {
  data.validate();
  if (weights.size() != data.rows())
    throw std::invalid_argument("best_stump: weight length mismatch");
  if (weights.minCoeff() < 0.0)
    throw std::invalid_argument("best_stump: weights must be nonnegative");
  if (weights.maxCoeff() <= 0.0)
    throw std::invalid_argument("best_stump: weights are all zero");

  const Eigen::Index m = data.rows();
  Eigen::VectorXd signed_weights(m);
  for (Eigen::Index i = 0; i < m; ++i)
    signed_weights[i] = weights[i] * data.labels[i];
  const double total = signed_weights.sum();

  const std::vector<int> candidates =
      pool.sample_features(static_cast<int>(data.dims()));

  BestStump best;
  best.edge = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> column(static_cast<std::size_t>(m));
  for (int f : candidates) {
    for (Eigen::Index i = 0; i < m; ++i)
      column[static_cast<std::size_t>(i)] = {data.features(i, f),
                                             signed_weights[i]};
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const FeatureScan scan = scan_feature(column, total);
    if (scan.best_edge > best.edge) {
      best.edge = scan.best_edge;
      best.stump = {f, scan.threshold, scan.polarity};
    }
  }
  return best;
}

}  // namespace tcb
