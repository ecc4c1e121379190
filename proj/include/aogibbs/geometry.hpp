#pragma once

#include "aogibbs/types.hpp"
#include "aogibbs/window.hpp"

#include <algorithm>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

namespace aogibbs {

template <typename Scalar>
struct BallT {
  PointT<Scalar> center;
  Scalar radius;
};
using Ball = BallT<double>;

/// v_d: 2, pi, 4 pi / 3.
template <typename Scalar = double>
constexpr Scalar unit_ball_volume(int d) {
  switch (d) {
    case 1:
      return Scalar(2);
    case 2:
      return std::numbers::pi_v<Scalar>;
    case 3:
      return Scalar(4) * std::numbers::pi_v<Scalar> / Scalar(3);
    default:
      throw std::invalid_argument("unit_ball_volume: unsupported dimension");
  }
}

template <typename Scalar>
Scalar ball_volume(int d, Scalar radius) {
  if (!(radius >= Scalar(0))) throw std::invalid_argument("ball_volume: negative radius");
  return unit_ball_volume<Scalar>(d) * std::pow(radius, d);
}

/// Closed-form |B(0, r1) n B(dist e1, r2)| for d in {1, 2, 3}.
template <typename Scalar>
Scalar lens_volume(int d, Scalar r1, Scalar r2, Scalar dist) {
  using std::acos;
  using std::sqrt;
  dist = std::abs(dist);
  if (dist >= r1 + r2) return Scalar(0);
  const Scalar rmin = std::min(r1, r2);
  if (dist <= std::abs(r1 - r2)) return ball_volume<Scalar>(d, rmin);
  switch (d) {
    case 1:
      return r1 + r2 - dist;
    case 2: {
      const Scalar a1 = (dist * dist + r1 * r1 - r2 * r2) / (Scalar(2) * dist * r1);
      const Scalar a2 = (dist * dist + r2 * r2 - r1 * r1) / (Scalar(2) * dist * r2);
      const Scalar t1 = acos(std::clamp(a1, Scalar(-1), Scalar(1)));
      const Scalar t2 = acos(std::clamp(a2, Scalar(-1), Scalar(1)));
      const Scalar k = (-dist + r1 + r2) * (dist + r1 - r2) * (dist - r1 + r2) * (dist + r1 + r2);
      return r1 * r1 * t1 + r2 * r2 * t2 - Scalar(0.5) * sqrt(std::max(k, Scalar(0)));
    }
    case 3: {
      const Scalar s = r1 + r2 - dist;
      return std::numbers::pi_v<Scalar> * s * s *
             (dist * dist + Scalar(2) * dist * (r1 + r2) - Scalar(3) * (r1 - r2) * (r1 - r2)) /
             (Scalar(12) * dist);
    }
    default:
      throw std::invalid_argument("lens_volume: unsupported dimension");
  }
}

/// Distance convention for volume computations: euclidean, or the torus of a window.
class Metric {
 public:
  Metric() = default;
  static Metric euclidean() { return {}; }
  static Metric torus(const Window& window) { return Metric(window.with_torus(true)); }

  bool is_torus() const { return torus_.has_value(); }
  const Window& window() const { return *torus_; }
  Point displacement(const Point& a, const Point& b) const {
    return torus_ ? torus_->displacement(a, b) : Point(b - a);
  }
  double distance(const Point& a, const Point& b) const { return displacement(a, b).norm(); }

  /// Translates of `ball` (centers shifted by lattice vectors) intersecting `around`.
  /// On the euclidean metric this is the ball itself when the two intersect.
  std::vector<Ball> images_meeting(const Ball& ball, const Ball& around) const;

 private:
  explicit Metric(Window w) : torus_(std::move(w)) {}
  std::optional<Window> torus_;
};

enum class QuadratureScheme { LatticeShift, Stratified };

/// Randomized quadrature controls. Each estimate is the mean of `replicates`
/// independent randomizations; its spread gives the reported standard error.
struct QuadratureSpec {
  double points_per_unit_volume = 4.0e4;
  QuadratureScheme scheme = QuadratureScheme::LatticeShift;
  double target_rel_error = 1.0e-3;
  int replicates = 16;
  int min_points_per_axis = 8;
  /// Double the point density until successive estimates agree within target_rel_error.
  bool adaptive = false;
  int max_doublings = 8;
  /// Use the exact d <= 2 union routines wherever a caller offers the choice.
  bool exact_when_available = true;

  void validate() const;
};

double pair_intersection_volume(int d, const Ball& a, const Ball& b, const Metric& metric = {});

/// Unsigned |B_1 n ... n B_k|.
Estimate k_intersection_volume(int d, const std::vector<Ball>& balls, const QuadratureSpec& quad, Rng& rng,
                               const Metric& metric = {});

/// |(union of balls) \ (union of minus)| by owner-decomposed randomized quadrature.
Estimate union_volume(int d, const std::vector<Ball>& balls, const std::vector<Ball>& minus,
                      const QuadratureSpec& quad, Rng& rng, const Metric& metric = {});

/// Exact |(union of balls) \ (union of minus)| for d in {1, 2}.
double union_volume_exact(int d, const std::vector<Ball>& balls, const std::vector<Ball>& minus,
                          const Metric& metric = {});

/// |ball \ (union of others)| where `others` are already placed in the ball's frame.
/// Exact for d <= 2 when quad.exact_when_available, quadrature otherwise.
Estimate uncovered_volume(int d, const Ball& ball, const std::vector<Ball>& others, const QuadratureSpec& quad,
                          Rng& rng);
double uncovered_volume_exact(int d, const Ball& ball, const std::vector<Ball>& others);

/// Exact area of a union of disks (boundary-arc integration).
double disk_union_area(const std::vector<Ball>& disks);
/// Exact length of a union of intervals [c - r, c + r].
double interval_union_length(const std::vector<Ball>& intervals);

/// Exact |B_1 n ... n B_k| for d <= 2 via Moebius inversion over exact unions.
double k_intersection_volume_exact(int d, const std::vector<Ball>& balls);

/// rho_c(2) = sqrt(2) - 1, rho_c(3) = sqrt(3/2) - 1.
double critical_ratio(int d);

namespace detail {

/// Quadrature of the integrand over the axis box [lo, lo + side]^d, averaged over replicates.
Estimate box_quadrature(int d, const Point& lo, double side, const QuadratureSpec& quad, Rng& rng,
                        const std::function<double(const Point&)>& integrand);

}  // namespace detail

}  // namespace aogibbs
