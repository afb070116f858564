#include "rowpilot/depth.hpp"

#include <numeric>

namespace rowpilot {
namespace {

// Union-find over provisional labels with path halving.
class LabelForest {
 public:
  int make() {
    parent_.push_back(int(parent_.size()));
    return parent_.back();
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  int unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<int> parent_;
};

}  // namespace

std::vector<ComponentBox> extract_components(const BinaryMask& mask) {
  const int h = int(mask.rows());
  const int w = int(mask.cols());
  if (h == 0 || w == 0) return {};

  // First pass: provisional labels from the already-visited 8-neighbours
  // (W, NW, N, NE).
  Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> labels =
      Eigen::Array<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(h, w, -1);
  LabelForest forest;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      int label = -1;
      auto visit = [&](int ny, int nx) {
        if (ny < 0 || nx < 0 || nx >= w) return;
        const int n = labels(ny, nx);
        if (n < 0) return;
        label = label < 0 ? forest.find(n) : forest.unite(label, n);
      };
      visit(y, x - 1);
      visit(y - 1, x - 1);
      visit(y - 1, x);
      visit(y - 1, x + 1);
      labels(y, x) = label < 0 ? forest.make() : label;
    }
  }

  // Second pass: fold every pixel into its root's box.
  std::vector<int> slot(forest.size(), -1);
  std::vector<ComponentBox> boxes;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = labels(y, x);
      if (l < 0) continue;
      const int root = forest.find(l);
      if (slot[root] < 0) {
        slot[root] = int(boxes.size());
        boxes.push_back({x, y, x, y});
        continue;
      }
      ComponentBox& b = boxes[slot[root]];
      b.x_min = std::min(b.x_min, x);
      b.x_max = std::max(b.x_max, x);
      b.y_max = std::max(b.y_max, y);
    }
  }
  return boxes;
}

}  // namespace rowpilot
