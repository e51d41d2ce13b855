#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "tcb/dataset.hpp"

namespace tcb {

// Summed-area table with a zero border row/column, so any axis-aligned
// rectangle sum is four lookups.
class IntegralImage {
 public:
  static IntegralImage build(const Eigen::MatrixXd& pixels);  // rows x cols

  // Sum over the rectangle [x, x+w) x [y, y+h) in pixel coordinates.
  double rect_sum(int x, int y, int w, int h) const;

  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_ = 0, height_ = 0;
  Eigen::MatrixXd table_;  // (height+1) x (width+1)
};

// The five basic rectangle patterns. Responses are contrast differences:
// equal-area positive and negative parts, so a constant offset on all
// pixels cancels.
enum class HaarKind {
  horizontal_2,  // left minus right halves
  vertical_2,    // top minus bottom halves
  horizontal_3,  // outer thirds minus twice the middle third
  vertical_3,
  diagonal_4,    // main-diagonal quadrants minus anti-diagonal quadrants
};

struct HaarFeature {
  HaarKind kind = HaarKind::horizontal_2;
  int x = 0, y = 0;          // top-left corner inside the window
  int width = 0, height = 0; // total extent; divisibility depends on kind
};

double haar_response(const HaarFeature& feature, const IntegralImage& image);

// All features of the five kinds that fit a win_w x win_h window, stepping
// positions and sizes by `stride`.
std::vector<HaarFeature> enumerate_haar_features(int win_w, int win_h,
                                                 int stride = 1);

// Response matrix: one row per window, one column per feature. Feeds the
// same stump machinery as tabular data.
RowMatrixXd haar_feature_matrix(const std::vector<Eigen::MatrixXd>& windows,
                                const std::vector<HaarFeature>& features);

// P2 (ascii) or P5 (binary, maxval <= 255) grayscale images.
Eigen::MatrixXd load_pgm(const std::string& path);

// Plain comma-separated pixel grid, one image row per line.
Eigen::MatrixXd load_pixel_csv(const std::string& path);

}  // namespace tcb
