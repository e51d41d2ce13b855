#include "tcb/haar.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcb {

IntegralImage IntegralImage::build(const Eigen::MatrixXd& pixels) {
  if (pixels.rows() == 0 || pixels.cols() == 0)
    throw std::invalid_argument("integral image: empty pixel grid");
  IntegralImage img;
  img.height_ = static_cast<int>(pixels.rows());
  img.width_ = static_cast<int>(pixels.cols());
  img.table_ = Eigen::MatrixXd::Zero(img.height_ + 1, img.width_ + 1);
  for (int y = 0; y < img.height_; ++y) {
    double row_sum = 0.0;
    for (int x = 0; x < img.width_; ++x) {
      row_sum += pixels(y, x);
      img.table_(y + 1, x + 1) = img.table_(y, x + 1) + row_sum;
    }
  }
  return img;
}

double IntegralImage::rect_sum(int x, int y, int w, int h) const {
  if (x < 0 || y < 0 || w < 0 || h < 0 || x + w > width_ || y + h > height_)
    throw std::invalid_argument("integral image: rectangle out of bounds");
  return table_(y + h, x + w) - table_(y, x + w) - table_(y + h, x) +
         table_(y, x);
}

namespace {

void check_divisible(const HaarFeature& f) {
  switch (f.kind) {
    case HaarKind::horizontal_2:
      if (f.width % 2 != 0)
        throw std::invalid_argument("haar: width must be even");
      break;
    case HaarKind::vertical_2:
      if (f.height % 2 != 0)
        throw std::invalid_argument("haar: height must be even");
      break;
    case HaarKind::horizontal_3:
      if (f.width % 3 != 0)
        throw std::invalid_argument("haar: width must be divisible by 3");
      break;
    case HaarKind::vertical_3:
      if (f.height % 3 != 0)
        throw std::invalid_argument("haar: height must be divisible by 3");
      break;
    case HaarKind::diagonal_4:
      if (f.width % 2 != 0 || f.height % 2 != 0)
        throw std::invalid_argument("haar: width and height must be even");
      break;
  }
}

}  // namespace

double haar_response(const HaarFeature& f, const IntegralImage& img) {
  if (f.width <= 0 || f.height <= 0)
    throw std::invalid_argument("haar: feature has empty extent");
  if (f.x < 0 || f.y < 0 || f.x + f.width > img.width() ||
      f.y + f.height > img.height())
    throw std::invalid_argument("haar: feature does not fit the window");
  check_divisible(f);

  switch (f.kind) {
    case HaarKind::horizontal_2: {
      const int half = f.width / 2;
      return img.rect_sum(f.x, f.y, half, f.height) -
             img.rect_sum(f.x + half, f.y, half, f.height);
    }
    case HaarKind::vertical_2: {
      const int half = f.height / 2;
      return img.rect_sum(f.x, f.y, f.width, half) -
             img.rect_sum(f.x, f.y + half, f.width, half);
    }
    case HaarKind::horizontal_3: {
      const int third = f.width / 3;
      return img.rect_sum(f.x, f.y, third, f.height) -
             2.0 * img.rect_sum(f.x + third, f.y, third, f.height) +
             img.rect_sum(f.x + 2 * third, f.y, third, f.height);
    }
    case HaarKind::vertical_3: {
      const int third = f.height / 3;
      return img.rect_sum(f.x, f.y, f.width, third) -
             2.0 * img.rect_sum(f.x, f.y + third, f.width, third) +
             img.rect_sum(f.x, f.y + 2 * third, f.width, third);
    }
    case HaarKind::diagonal_4: {
      const int hw = f.width / 2;
      const int hh = f.height / 2;
      return img.rect_sum(f.x, f.y, hw, hh) +
             img.rect_sum(f.x + hw, f.y + hh, hw, hh) -
             img.rect_sum(f.x + hw, f.y, hw, hh) -
             img.rect_sum(f.x, f.y + hh, hw, hh);
    }
  }
  throw std::logic_error("haar: unknown feature kind");
}

std::vector<HaarFeature> enumerate_haar_features(int win_w, int win_h,
                                                 int stride) {
  if (win_w <= 0 || win_h <= 0 || stride <= 0)
    throw std::invalid_argument("haar: bad window geometry");
  std::vector<HaarFeature> out;
  struct KindSpec {
    HaarKind kind;
    int wq, hq;  // width/height quantum
  };
  const KindSpec kinds[] = {
      {HaarKind::horizontal_2, 2, 1}, {HaarKind::vertical_2, 1, 2},
      {HaarKind::horizontal_3, 3, 1}, {HaarKind::vertical_3, 1, 3},
      {HaarKind::diagonal_4, 2, 2},
  };
  for (const auto& spec : kinds) {
    for (int w = spec.wq; w <= win_w; w += spec.wq * stride) {
      for (int h = spec.hq; h <= win_h; h += spec.hq * stride) {
        for (int x = 0; x + w <= win_w; x += stride) {
          for (int y = 0; y + h <= win_h; y += stride) {
            out.push_back({spec.kind, x, y, w, h});
          }
        }
      }
    }
  }
  return out;
}

RowMatrixXd haar_feature_matrix(const std::vector<Eigen::MatrixXd>& windows,
                                const std::vector<HaarFeature>& features) {
  if (windows.empty() || features.empty())
    throw std::invalid_argument("haar: no windows or no features");
  RowMatrixXd out(static_cast<Eigen::Index>(windows.size()),
                  static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const IntegralImage img = IntegralImage::build(windows[i]);
    for (std::size_t j = 0; j < features.size(); ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          haar_response(features[j], img);
  }
  return out;
}

Eigen::MatrixXd load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P2" && magic != "P5")
    throw std::runtime_error("pgm: unsupported format in " + path);

  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw std::runtime_error("pgm: truncated header in " + path);
  };
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255)
    throw std::runtime_error("pgm: unsupported geometry/maxval in " + path);

  Eigen::MatrixXd img(h, w);
  if (magic == "P2") {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) img(y, x) = std::stod(next_token());
  } else {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw std::runtime_error("pgm: truncated pixel data in " + path);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        img(y, x) = buf[static_cast<std::size_t>(y) * w + x];
  }
  return img;
}

Eigen::MatrixXd load_pixel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("pixel csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("pixel csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("pixel csv: empty file " + path);
  Eigen::MatrixXd img(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t y = 0; y < rows.size(); ++y)
    for (std::size_t x = 0; x < rows.front().size(); ++x)
      img(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) =
          rows[y][x];
  return img;
}

}  // namespace tcb
