#pragma once

#include "aogibbs/types.hpp"
#include "aogibbs/window.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

namespace aogibbs {

/// A center in R^d with a nonnegative radius mark.
struct MarkedPoint {
  Point x;
  double radius = 0.0;

  friend bool operator==(const MarkedPoint& a, const MarkedPoint& b) {
    return a.radius == b.radius && a.x.size() == b.x.size() && a.x == b.x;
  }
};

void validate_point(const MarkedPoint& p, int dim);

/// Finite simple marked configuration with a uniform-grid spatial index.
///
/// The grid cell side is max(2 * (max_radius + pad), min_cell); the index is
/// rebuilt whenever the running maximum radius outgrows the current cell size.
class Configuration {
 public:
  explicit Configuration(int dim);
  Configuration(int dim, std::vector<MarkedPoint> points);

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const MarkedPoint& operator[](std::size_t i) const { return points_[i]; }
  const std::vector<MarkedPoint>& points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  double max_radius() const { return r_max_; }
  double cell_side() const { return cell_; }

  /// `pad` is the polymer radius r; `min_cell` is typically window side / 64.
  void set_index_hint(double pad, double min_cell);

  /// Returns false (and leaves the configuration unchanged) if the position is taken.
  bool insert(const MarkedPoint& p);
  /// Removes point i; the last point takes its slot.
  void erase(std::size_t i);
  void replace(std::size_t i, const MarkedPoint& p);
  void clear();

  bool contains_position(const Point& x) const;

  /// Calls f(i) for every point whose cell can hold points within distance s of x
  /// (a superset of the points within s).
  void for_each_candidate(const Point& x, double s, const std::function<void(std::size_t)>& f) const;
  /// Indices of the points with |p - x| <= s.
  std::vector<std::size_t> neighbors(const Point& x, double s) const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.dim_ == b.dim_ && a.points_ == b.points_;
  }

 private:
  using CellKey = std::uint64_t;
  CellKey key_of(const Point& x) const;
  CellKey key_of_cell(const std::array<std::int64_t, 3>& c) const;
  std::array<std::int64_t, 3> cell_coords(const Point& x) const;
  void rebuild();
  void index_point(std::size_t i);
  void unindex_point(std::size_t i);
  void recompute_max_radius();

  int dim_;
  std::vector<MarkedPoint> points_;
  std::vector<CellKey> keys_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>> grid_;
  double r_max_ = 0.0;
  double pad_ = 0.0;
  double min_cell_ = 1.0;
  double cell_ = 1.0;
};

/// Half-open mark interval [lo, hi).
struct MarkRange {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double radius) const { return radius >= lo && radius < hi; }
};

enum class Weight { One, Psi };

/// psi(R) = 1 + R^d.
inline double psi_weight(double radius, int d) { return 1.0 + std::pow(radius, d); }

/// Sum of the weight over points in window x mark range.
double count(const Configuration& config, const Window& window, MarkRange marks = {},
             Weight weight = Weight::One);

Configuration restrict(const Configuration& config, const Window& window);
Configuration restrict_complement(const Configuration& config, const Window& window);

/// (inner restricted to the window) united with (outer restricted to its complement).
Configuration concatenate(const Configuration& inner, const Window& window, const Configuration& outer);

/// Translates every position by -x; marks unchanged.
Configuration shift(const Configuration& config, const Point& x);

/// A translate of a stored point: config[index] moved by a lattice vector.
struct Image {
  std::size_t index;
  Point position;
  double radius;
  bool is_identity;
};

/// Translates of stored points within distance s of x on the torus of `window`.
std::vector<Image> periodic_neighbors(const Configuration& config, const Window& window, const Point& x, double s);

/// Neighbor queries on the periodization of a configuration contained in a torus window.
/// Holds a reference; the configuration must outlive the view.
class PeriodicView {
 public:
  PeriodicView(const Configuration& config, const Window& window);

  const Configuration& config() const { return *config_; }
  const Window& window() const { return window_; }

  /// Every translate p + L k of a stored point with |p + L k - x| <= s.
  std::vector<Image> neighbors(const Point& x, double s) const;

  /// Original points plus translates lying within `reach` of the box.
  Configuration materialize(double reach) const;

 private:
  const Configuration* config_;
  Window window_;
};

/// Rejects configurations with points outside the window.
PeriodicView periodize(const Configuration& config, const Window& window);

/// Enumerates lattice offsets k in {-m..m}^d.
void for_each_offset(int dim, int m, const std::function<void(const Point&)>& f);

}  // namespace aogibbs
