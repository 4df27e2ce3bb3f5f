#include "stpen/geometry.hpp"

#include <string>
#include <vector>

#include "stpen/errors.hpp"

namespace stpen {

void require_valid_box(const Box& box) {
  if (box.x1 >= box.x2 || box.y1 >= box.y2) {
    throw BoxError("degenerate box (" + std::to_string(box.x1) + "," + std::to_string(box.y1) + "," +
                   std::to_string(box.x2) + "," + std::to_string(box.y2) + ")");
  }
  if (!box.is_valid()) {
    throw BoxError("box outside [0,1]: (" + std::to_string(box.x1) + "," + std::to_string(box.y1) + "," +
                   std::to_string(box.x2) + "," + std::to_string(box.y2) + ")");
  }
}

double covered_fraction(const Box& target, std::span<const Box> others) {
  const double area = target.area();
  if (area <= 0.0) return 0.0;

  // Clip occluders to the target, then measure their union exactly on the
  // grid induced by the clipped edges.
  std::vector<Box> clipped;
  std::vector<double> xs{target.x1, target.x2};
  std::vector<double> ys{target.y1, target.y2};
  for (const auto& o : others) {
    Box c{std::max(o.x1, target.x1), std::max(o.y1, target.y1), std::min(o.x2, target.x2),
          std::min(o.y2, target.y2)};
    if (c.x1 >= c.x2 || c.y1 >= c.y2) continue;
    clipped.push_back(c);
    xs.push_back(c.x1);
    xs.push_back(c.x2);
    ys.push_back(c.y1);
    ys.push_back(c.y2);
  }
  if (clipped.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  double covered = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double cx = 0.5 * (xs[i] + xs[i + 1]);
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      for (const auto& c : clipped) {
        if (c.x1 <= cx && cx <= c.x2 && c.y1 <= cy && cy <= c.y2) {
          covered += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
          break;
        }
      }
    }
  }
  return std::min(1.0, covered / area);
}

}  // namespace stpen
