#pragma once

#include "aogibbs/types.hpp"

namespace aogibbs {

/// Axis-aligned half-open box [center - side/2, center + side/2)^d, optionally a torus.
class Window {
 public:
  Window(Point center, double side, bool torus = false);

  /// Lambda_n = [-n/2, n/2)^d.
  static Window centered(int dim, double side, bool torus = false) {
    return Window(Point::Zero(dim), side, torus);
  }

  int dim() const { return static_cast<int>(center_.size()); }
  const Point& center() const { return center_; }
  double side() const { return side_; }
  bool torus() const { return torus_; }
  double volume() const { return std::pow(side_, dim()); }

  Point lower() const { return center_.array() - 0.5 * side_; }
  Point upper() const { return center_.array() + 0.5 * side_; }

  bool contains(const Point& x) const;
  /// Smallest distance from x to the complement of the box (0 outside); euclidean.
  double depth(const Point& x) const;
  /// Euclidean distance from x to the box (0 inside).
  double distance_to_box(const Point& x) const;

  /// Representative of x in [lower, upper).
  Point wrap(const Point& x) const;
  /// Displacement b - a; minimal image when the window is a torus.
  Point displacement(const Point& a, const Point& b) const;
  double distance(const Point& a, const Point& b) const { return displacement(a, b).norm(); }

  Window with_torus(bool torus) const { return Window(center_, side_, torus); }

 private:
  Point center_;
  double side_;
  bool torus_;
};

}  // namespace aogibbs
