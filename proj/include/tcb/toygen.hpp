#pragma once

#include <cstdint>
#include <string>

#include "tcb/dataset.hpp"

namespace tcb {

enum class ToyKind { gaussians2d, separable, xor_grid };

// Seeded 2D synthetic datasets. Sampling uses a private bit-exact uniform /
// Box-Muller path so the same seed reproduces the same bytes everywhere.
//
//   gaussians2d - overlapping class clouds, intended imbalanced (more
//                 negatives than positives)
//   separable   - one threshold on feature 0 reaches zero training error
//   xor_grid    - checkerboard quadrants; no single axis stump works
Dataset gen_toy(ToyKind kind, Eigen::Index positives, Eigen::Index negatives,
                std::uint64_t seed);

const char* toy_kind_name(ToyKind kind);
ToyKind toy_kind_from_name(const std::string& name);

}  // namespace tcb
