#include "tcb/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace tcb {

Dataset Dataset::sorted(RowMatrixXd features, Eigen::VectorXi labels) {
  if (features.rows() != labels.size())
    throw std::invalid_argument("dataset: feature/label row count mismatch");
  const Eigen::Index m = features.rows();
  if (m == 0) throw std::invalid_argument("dataset: empty");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return labels[a] > labels[b];
                   });

  Dataset out;
  out.features.resize(m, features.cols());
  out.labels.resize(m);
  out.source_rows = order;
  for (Eigen::Index i = 0; i < m; ++i) {
    out.features.row(i) = features.row(order[static_cast<std::size_t>(i)]);
    out.labels[i] = labels[order[static_cast<std::size_t>(i)]];
  }
  out.m1 = (out.labels.array() == 1).count();
  out.m2 = m - out.m1;
  out.validate();
  return out;
}

void Dataset::validate() const {
  const Eigen::Index m = rows();
  if (m == 0) throw std::invalid_argument("dataset: empty");
  if (labels.size() != m)
    throw std::invalid_argument("dataset: feature/label row count mismatch");
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (labels[i] != 1 && labels[i] != -1)
      throw std::invalid_argument("dataset: labels must be +1 or -1");
    if (labels[i] == 1) {
      if (i != pos)
        throw std::invalid_argument("dataset: rows not sorted positives-first");
      ++pos;
    }
  }
  if (pos != m1 || m - pos != m2)
    throw std::invalid_argument("dataset: m1/m2 do not match labels");
  if (m1 < 1 || m2 < 1)
    throw std::invalid_argument("dataset: need at least one example per class");
}

ClassMeanVectors ClassMeanVectors::build(Eigen::Index m1, Eigen::Index m2) {
  if (m1 < 1 || m2 < 1)
    throw std::invalid_argument("class mean vectors: empty class");
  const Eigen::Index m = m1 + m2;
  ClassMeanVectors v;
  v.positive = Eigen::VectorXd::Zero(m);
  v.negative = Eigen::VectorXd::Zero(m);
  v.positive.head(m1).setConstant(1.0 / static_cast<double>(m1));
  v.negative.tail(m2).setConstant(1.0 / static_cast<double>(m2));
  v.combined = v.positive + v.negative;
  return v;
}

}  // namespace tcb
