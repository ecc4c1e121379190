#include "aogibbs/window.hpp"

namespace aogibbs {

Window::Window(Point center, double side, bool torus)
    : center_(std::move(center)), side_(side), torus_(torus) {
  check_dim(dim());
  if (!(side > 0.0) || !std::isfinite(side)) throw std::invalid_argument("window side must be positive and finite");
  if (!center_.allFinite()) throw std::invalid_argument("window center must be finite");
}

bool Window::contains(const Point& x) const {
  const double h = 0.5 * side_;
  for (int i = 0; i < dim(); ++i) {
    const double u = x[i] - center_[i];
    if (!(u >= -h && u < h)) return false;
  }
  return true;
}

double Window::depth(const Point& x) const {
  if (!contains(x)) return 0.0;
  const double h = 0.5 * side_;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < dim(); ++i) {
    const double u = x[i] - center_[i];
    best = std::min({best, u + h, h - u});
  }
  return best;
}

double Window::distance_to_box(const Point& x) const {
  const double h = 0.5 * side_;
  double acc = 0.0;
  for (int i = 0; i < dim(); ++i) {
    const double u = std::abs(x[i] - center_[i]) - h;
    if (u > 0.0) acc += u * u;
  }
  return std::sqrt(acc);
}

Point Window::wrap(const Point& x) const {
  Point y = x;
  const Point lo = lower();
  for (int i = 0; i < dim(); ++i) {
    double u = std::fmod(x[i] - lo[i], side_);
    if (u < 0.0) u += side_;
    if (u >= side_) u = 0.0;
    y[i] = lo[i] + u;
  }
  return y;
}

Point Window::displacement(const Point& a, const Point& b) const {
  Point d = b - a;
  if (torus_) {
    for (int i = 0; i < dim(); ++i) d[i] -= side_ * std::nearbyint(d[i] / side_);
  }
  return d;
}

}  // namespace aogibbs
