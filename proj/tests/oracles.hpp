#pragma once

// Slow, independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <tuple>
#include <vector>

#include "rowpilot/depth.hpp"
#include "rowpilot/fallback.hpp"

namespace oracle {

using rowpilot::BinaryMask;
using rowpilot::ComponentBox;

/// Explicit-stack flood fill over the 8-neighbourhood.
inline std::vector<ComponentBox> flood_fill_boxes(const BinaryMask& mask) {
  const int h = int(mask.rows());
  const int w = int(mask.cols());
  std::vector<std::vector<bool>> seen(h, std::vector<bool>(w, false));
  std::vector<ComponentBox> boxes;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (!mask(sy, sx) || seen[sy][sx]) continue;
      ComponentBox box{sx, sy, sx, sy};
      std::vector<std::pair<int, int>> stack{{sy, sx}};
      seen[sy][sx] = true;
      while (!stack.empty()) {
        const auto [y, x] = stack.back();
        stack.pop_back();
        box.x_min = std::min(box.x_min, x);
        box.x_max = std::max(box.x_max, x);
        box.y_min = std::min(box.y_min, y);
        box.y_max = std::max(box.y_max, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
            if (!mask(ny, nx) || seen[ny][nx]) continue;
            seen[ny][nx] = true;
            stack.push_back({ny, nx});
          }
      }
      boxes.push_back(box);
    }
  }
  return boxes;
}

inline void sort_boxes(std::vector<ComponentBox>& boxes) {
  std::sort(boxes.begin(), boxes.end(), [](const ComponentBox& a, const ComponentBox& b) {
    return std::tie(a.y_min, a.x_min, a.y_max, a.x_max) < std::tie(b.y_min, b.x_min, b.y_max, b.x_max);
  });
}

/// Max-area window with the documented tie rule, by exhaustive comparison.
inline std::optional<ComponentBox> best_window(const std::vector<ComponentBox>& boxes, double t_area,
                                               int width) {
  std::optional<ComponentBox> best;
  for (const ComponentBox& b : boxes) {
    const long area = long(b.x_max - b.x_min + 1) * (b.y_max - b.y_min + 1);
    if (!best) {
      best = b;
      continue;
    }
    const long best_area = long(best->x_max - best->x_min + 1) * (best->y_max - best->y_min + 1);
    const double dc = std::abs(0.5 * (b.x_min + b.x_max) - 0.5 * width);
    const double best_dc = std::abs(0.5 * (best->x_min + best->x_max) - 0.5 * width);
    if (area > best_area ||
        (area == best_area &&
         (dc < best_dc ||
          (dc == best_dc && std::tie(b.x_min, b.y_min, b.x_max, b.y_max) <
                                std::tie(best->x_min, best->y_min, best->x_max, best->y_max)))))
      best = b;
  }
  if (!best) return std::nullopt;
  const long area = long(best->x_max - best->x_min + 1) * (best->y_max - best->y_min + 1);
  if (double(area) < t_area) return std::nullopt;
  return best;
}

/// Random mask with a given fill probability.
inline BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution bit(p);
  BinaryMask m(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(y, x) = bit(rng) ? 1 : 0;
  return m;
}

/// Variance of the 4-neighbour Laplacian with mirror (reflect-101) borders,
/// computed by explicit kernel convolution.
inline double laplacian_variance(const rowpilot::RgbFrame& f) {
  const int kernel[3][3] = {{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
  auto mirror = [](int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * (n - 1) - i;
    return i;
  };
  std::vector<double> values;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const int sy = mirror(y + ky - 1, f.height);
          const int sx = mirror(x + kx - 1, f.width);
          const double gray = (f.at(sy, sx, 0) + f.at(sy, sx, 1) + f.at(sy, sx, 2)) / 3.0;
          acc += kernel[ky][kx] * gray;
        }
      values.push_back(acc);
    }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return var / double(values.size());
}

}  // namespace oracle
