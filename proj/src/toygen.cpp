#include "tcb/toygen.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tcb {

namespace {

// Uniform in (0, 1], from the top 53 bits of the engine output.
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller, one draw per call.
double gaussian(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Dataset gen_toy(ToyKind kind, Eigen::Index positives, Eigen::Index negatives,
                std::uint64_t seed) {
  if (positives < 1 || negatives < 1)
    throw std::invalid_argument("gen_toy: counts must be >= 1 per class");
  const Eigen::Index m = positives + negatives;
  std::mt19937_64 rng(seed);

  Dataset data;
  data.features.resize(m, 2);
  data.labels.resize(m);
  data.labels.head(positives).setConstant(1);
  data.labels.tail(negatives).setConstant(-1);
  data.m1 = positives;
  data.m2 = negatives;
  data.source_rows.resize(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < data.source_rows.size(); ++i)
    data.source_rows[i] = static_cast<Eigen::Index>(i);

  switch (kind) {
    case ToyKind::gaussians2d:
      // Tight positive cluster inside a broad negative cloud, so a
      // symmetric-loss learner is tempted to sacrifice positives.
      for (Eigen::Index i = 0; i < positives; ++i) {
        data.features(i, 0) = 0.7 + 0.5 * gaussian(rng);
        data.features(i, 1) = 0.7 + 0.5 * gaussian(rng);
      }
      for (Eigen::Index i = positives; i < m; ++i) {
        data.features(i, 0) = -0.7 + 1.5 * gaussian(rng);
        data.features(i, 1) = -0.7 + 1.5 * gaussian(rng);
      }
      break;
    case ToyKind::separable:
      for (Eigen::Index i = 0; i < positives; ++i) {
        data.features(i, 0) = uniform(rng, 1.0, 2.0);
        data.features(i, 1) = uniform(rng, -1.0, 1.0);
      }
      for (Eigen::Index i = positives; i < m; ++i) {
        data.features(i, 0) = uniform(rng, -2.0, -1.0);
        data.features(i, 1) = uniform(rng, -1.0, 1.0);
      }
      break;
    case ToyKind::xor_grid: {
      auto fill = [&](Eigen::Index row, int quadrant) {
        const double sx = quadrant == 0 || quadrant == 3 ? 1.0 : -1.0;
        const double sy = quadrant <= 1 ? 1.0 : -1.0;
        data.features(row, 0) = sx * (1.0 + 0.2 * gaussian(rng));
        data.features(row, 1) = sy * (1.0 + 0.2 * gaussian(rng));
      };
      // Positives on the main diagonal quadrants, negatives off-diagonal.
      for (Eigen::Index i = 0; i < positives; ++i)
        fill(i, i % 2 == 0 ? 0 : 2);
      for (Eigen::Index i = positives; i < m; ++i)
        fill(i, i % 2 == 0 ? 1 : 3);
      break;
    }
  }
  data.validate();
  return data;
}

const char* toy_kind_name(ToyKind kind) {
  switch (kind) {
    case ToyKind::gaussians2d: return "gaussians2d";
    case ToyKind::separable: return "separable";
    case ToyKind::xor_grid: return "xor";
  }
  throw std::logic_error("gen_toy: unknown kind");
}

ToyKind toy_kind_from_name(const std::string& name) {
  if (name == "gaussians2d") return ToyKind::gaussians2d;
  if (name == "separable") return ToyKind::separable;
  if (name == "xor") return ToyKind::xor_grid;
  throw std::invalid_argument("gen_toy: unknown kind '" + name + "'");
}

}  // namespace tcb
