#pragma once

#include <algorithm>
#include <span>

namespace stpen {

/// Axis-aligned rectangle in normalized image coordinates.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 1.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }

  bool is_valid() const {
    return 0.0 <= x1 && x1 < x2 && x2 <= 1.0 && 0.0 <= y1 && y1 < y2 && y2 <= 1.0;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

/// Throws BoxError unless `box` satisfies is_valid().
void require_valid_box(const Box& box);

/// Fraction of `target` covered by the union of `others` (0 when target has no area).
double covered_fraction(const Box& target, std::span<const Box> others);

}  // namespace stpen
