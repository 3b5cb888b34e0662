#include "octplaque/render.hpp"

#include <array>
#include <stdexcept>

#include "octplaque/png_io.hpp"

namespace octplaque {

namespace {

constexpr int kStripHeight = 14;
constexpr int kSeparator = 2;

std::array<float, 3> class_color(int cls) {
  switch (cls) {
    case 0: return {0.13f, 0.72f, 0.25f};  // no plaque: green
    case 1: return {0.82f, 0.16f, 0.12f};  // plaque / lipid-fibrous: red
    case 2: return {0.95f, 0.68f, 0.15f};  // calcified: amber
    default: return {0.55f, 0.55f, 0.55f};
  }
}

}  // namespace

void render_pullback(const std::vector<PullbackStripFrame>& frames,
                     const std::filesystem::path& out_path) {
  if (frames.empty())
    throw std::invalid_argument("render_pullback: empty frame sequence");
  const Eigen::Index img_h = frames.front().cart.rows();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].cart.rows() != img_h ||
        frames[i].cart.cols() != frames[i].cart.rows())
      throw std::invalid_argument("render_pullback: frames must be square");
    if (i > 0 && frames[i].frame_index <= frames[i - 1].frame_index)
      throw std::invalid_argument(
          "render_pullback: frame indices must be strictly increasing");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(frames.size());
  const Eigen::Index total_h =
      img_h + 2 * (kSeparator + kStripHeight);
  ImageMatrix<float> r(total_h, n), g(total_h, n), b(total_h, n);
  r.setOnes();
  g.setOnes();
  b.setOnes();

  for (Eigen::Index col = 0; col < n; ++col) {
    const auto& frame = frames[static_cast<std::size_t>(col)];
    const Eigen::Index mid = frame.cart.cols() / 2;
    for (Eigen::Index row = 0; row < img_h; ++row) {
      const float v = frame.cart(row, mid);
      r(row, col) = v;
      g(row, col) = v;
      b(row, col) = v;
    }
    const auto pred_color = class_color(frame.predicted);
    const auto truth_color = class_color(frame.truth);
    const Eigen::Index pred_top = img_h + kSeparator;
    const Eigen::Index truth_top = pred_top + kStripHeight + kSeparator;
    for (Eigen::Index row = 0; row < kStripHeight; ++row) {
      r(pred_top + row, col) = pred_color[0];
      g(pred_top + row, col) = pred_color[1];
      b(pred_top + row, col) = pred_color[2];
      r(truth_top + row, col) = truth_color[0];
      g(truth_top + row, col) = truth_color[1];
      b(truth_top + row, col) = truth_color[2];
    }
  }
  save_png_rgb8(out_path, r, g, b);
}

}  // namespace octplaque
