#include "tcb/margin.hpp"

#include <cmath>
#include <stdexcept>

namespace tcb {

MarginMatrix MarginMatrix::build(const Dataset& data,
                                 std::span<const DecisionStump> classifiers) {
  data.validate();
  if (classifiers.empty())
    throw std::invalid_argument("margin matrix: empty classifier list");
  MarginMatrix a(data.rows());
  for (const DecisionStump& stump : classifiers)
    a.append_column(margin_column(data, stump));
  return a;
}

Eigen::VectorXd MarginMatrix::margin_column(const Dataset& data,
                                            const DecisionStump& stump) {
  Eigen::VectorXd h = stump.evaluate(data.features);
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] *= data.labels[i];
  return h;
}

void MarginMatrix::append_column(const Eigen::VectorXd& column) {
  if (column.size() != a_.rows())
    throw std::invalid_argument("margin matrix: column length mismatch");
  for (Eigen::Index i = 0; i < column.size(); ++i)
    if (column[i] != 1.0 && column[i] != -1.0)
      throw std::invalid_argument("margin matrix: entries must be exactly +-1");
  a_.conservativeResize(Eigen::NoChange, a_.cols() + 1);
  a_.col(a_.cols() - 1) = column;
}

}  // namespace tcb
