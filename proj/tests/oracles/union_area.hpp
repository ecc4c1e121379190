#pragma once

// Test-side reference for union areas in the plane: integrate, over y, the length of
// the union of horizontal chords. Independent of the library's boundary-arc routine.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

struct Disk {
  double x;
  double y;
  double r;
};

using Intervals = std::vector<std::pair<double, double>>;

inline Intervals merged(Intervals iv) {
  std::sort(iv.begin(), iv.end());
  Intervals out;
  for (const auto& [a, b] : iv) {
    if (!out.empty() && a <= out.back().second) {
      out.back().second = std::max(out.back().second, b);
    } else {
      out.emplace_back(a, b);
    }
  }
  return out;
}

inline double length(const Intervals& u) {
  double s = 0.0;
  for (const auto& [a, b] : u) s += b - a;
  return s;
}

/// |U \ M| for merged interval lists.
inline double length_minus(const Intervals& u, const Intervals& m) {
  double s = length(u);
  for (const auto& [a, b] : u) {
    for (const auto& [c, e] : m) s -= std::max(0.0, std::min(b, e) - std::max(a, c));
  }
  return s;
}

inline Intervals chords(const std::vector<Disk>& disks, double y, double clip_lo, double clip_hi) {
  Intervals iv;
  for (const auto& d : disks) {
    const double h = d.r * d.r - (y - d.y) * (y - d.y);
    if (h <= 0.0) continue;
    const double w = std::sqrt(h);
    const double a = std::max(d.x - w, clip_lo);
    const double b = std::min(d.x + w, clip_hi);
    if (b > a) iv.emplace_back(a, b);
  }
  return merged(std::move(iv));
}

/// Area of (union of `disks`) minus (union of `minus`), optionally clipped to a box.
inline double union_area(const std::vector<Disk>& disks, const std::vector<Disk>& minus = {},
                         double x_lo = -INFINITY, double x_hi = INFINITY, double y_lo = -INFINITY,
                         double y_hi = INFINITY) {
  if (disks.empty()) return 0.0;
  std::vector<double> ys;
  std::vector<Disk> all = disks;
  all.insert(all.end(), minus.begin(), minus.end());
  for (const auto& d : all) {
    ys.push_back(d.y - d.r);
    ys.push_back(d.y + d.r);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double dx = all[j].x - all[i].x, dy = all[j].y - all[i].y;
      const double dist = std::hypot(dx, dy);
      if (dist == 0.0 || dist >= all[i].r + all[j].r || dist <= std::abs(all[i].r - all[j].r)) continue;
      const double a = (all[i].r * all[i].r - all[j].r * all[j].r + dist * dist) / (2.0 * dist);
      const double h = std::sqrt(std::max(0.0, all[i].r * all[i].r - a * a));
      const double my = all[i].y + a * dy / dist;
      ys.push_back(my + h * dx / dist);
      ys.push_back(my - h * dx / dist);
    }
  }
  for (const auto& d : all) {
    for (double xc : {x_lo, x_hi}) {
      const double h = d.r * d.r - (xc - d.x) * (xc - d.x);
      if (std::isfinite(xc) && h > 0.0) {
        ys.push_back(d.y + std::sqrt(h));
        ys.push_back(d.y - std::sqrt(h));
      }
    }
  }
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& d : disks) {
    lo = std::min(lo, d.y - d.r);
    hi = std::max(hi, d.y + d.r);
  }
  lo = std::max(lo, y_lo);
  hi = std::min(hi, y_hi);
  ys.push_back(lo);
  ys.push_back(hi);
  std::sort(ys.begin(), ys.end());

  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [&](double y) { return length_minus(chords(disks, y, x_lo, x_hi), chords(minus, y, x_lo, x_hi)); };
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < ys.size(); ++k) {
    const double a = std::max(ys[k], lo), b = std::min(ys[k + 1], hi);
    if (b - a <= 1e-14) continue;
    area += integrator.integrate(f, a, b, 1e-12);
  }
  return area;
}

/// Union area on the torus [lo, lo + L)^2 via the 3x3 block of translates clipped to the box.
inline double torus_union_area(const std::vector<Disk>& disks, double lo, double L) {
  std::vector<Disk> tiled;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      for (const auto& d : disks) tiled.push_back({d.x + i * L, d.y + j * L, d.r});
    }
  }
  return union_area(tiled, {}, lo, lo + L, lo, lo + L);
}

/// Length of a union of intervals [c - r, c + r] on the line or a circle of length L (L > 0).
inline double interval_union(const std::vector<std::pair<double, double>>& center_radius, double lo = 0.0,
                             double L = 0.0) {
  Intervals iv;
  for (const auto& [c, r] : center_radius) {
    if (L > 0.0) {
      for (int k = -1; k <= 1; ++k) {
        const double a = std::max(c - r + k * L, lo), b = std::min(c + r + k * L, lo + L);
        if (b > a) iv.emplace_back(a, b);
      }
    } else {
      iv.emplace_back(c - r, c + r);
    }
  }
  return length(merged(std::move(iv)));
}

}  // namespace oracle
