#ifndef CORNERKIT_POINT_HPP
#define CORNERKIT_POINT_HPP

#include <array>
#include <cmath>
#include <cstddef>

namespace cornerkit {

/// A point of the chart, coordinates (x1, x2, x3) stored 0-based.
struct Point {
  std::array<double, 3> coords{0.0, 0.0, 0.0};

  double operator[](std::size_t i) const { return coords[i]; }
  double& operator[](std::size_t i) { return coords[i]; }

  bool finite() const {
    return std::isfinite(coords[0]) && std::isfinite(coords[1]) && std::isfinite(coords[2]);
  }

  friend bool operator==(const Point&, const Point&) = default;
};

} // namespace cornerkit

#endif
