#include "aogibbs/geometry.hpp"

#include "aogibbs/configuration.hpp"

#include <algorithm>
#include <numeric>

namespace aogibbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool inside(const Point& p, const Ball& b) { return (p - b.center).squaredNorm() <= b.radius * b.radius; }

void check_balls(int d, const std::vector<Ball>& balls) {
  for (const auto& b : balls) {
    if (b.center.size() != d) throw std::invalid_argument("ball has wrong dimension");
    if (!(b.radius >= 0.0) || !std::isfinite(b.radius)) throw std::invalid_argument("ball radius must be >= 0");
  }
}

void check_injective(const Metric& metric, const std::vector<Ball>& balls) {
  if (!metric.is_torus()) return;
  const double half = 0.5 * metric.window().side();
  for (const auto& b : balls) {
    if (b.radius > half) throw std::invalid_argument("torus volume: ball radius exceeds half the torus side");
  }
}

double uncovered_closed_form(int d, const Ball& ball, const std::vector<Ball>& others, bool& done) {
  done = true;
  if (others.empty()) return ball_volume(d, ball.radius);
  if (others.size() == 1) {
    const double dist = (others[0].center - ball.center).norm();
    return std::max(0.0, ball_volume(d, ball.radius) - lens_volume(d, ball.radius, others[0].radius, dist));
  }
  done = false;
  return 0.0;
}

Estimate uncovered_quadrature(int d, const Ball& ball, const std::vector<Ball>& others, const QuadratureSpec& quad,
                              Rng& rng) {
  if (ball.radius == 0.0) return Estimate::exact(0.0);
  bool done = false;
  const double closed = uncovered_closed_form(d, ball, others, done);
  if (done) return Estimate::exact(closed);
  const Point lo = ball.center.array() - ball.radius;
  const Estimate covered = detail::box_quadrature(d, lo, 2.0 * ball.radius, quad, rng, [&](const Point& p) {
    if (!inside(p, ball)) return 0.0;
    for (const auto& o : others) {
      if (inside(p, o)) return 1.0;
    }
    return 0.0;
  });
  Estimate out{ball_volume(d, ball.radius) - covered.value, covered.std_error, covered.n_samples};
  out.value = std::max(out.value, 0.0);
  return out;
}

// Balls of `others` (through any lattice image) meeting `ball`, placed in the ball's frame.
std::vector<Ball> gather_images(const Metric& metric, const Ball& ball, const std::vector<Ball>& others,
                                std::size_t limit) {
  std::vector<Ball> out;
  for (std::size_t j = 0; j < std::min(limit, others.size()); ++j) {
    if (others[j].radius == 0.0) continue;
    for (auto& img : metric.images_meeting(others[j], ball)) out.push_back(std::move(img));
  }
  return out;
}

template <typename Uncovered>
Estimate owner_decomposition(const std::vector<Ball>& balls, const std::vector<Ball>& minus,
                             const Metric& metric, Uncovered&& uncovered) {
  Estimate total = Estimate::exact(0.0);
  double var = 0.0;
  std::size_t n_samples = 1;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const Ball& b = balls[i];
    if (b.radius == 0.0) continue;
    std::vector<Ball> lower = gather_images(metric, b, balls, i);
    auto from_minus = gather_images(metric, b, minus, minus.size());
    lower.insert(lower.end(), from_minus.begin(), from_minus.end());
    const Estimate term = uncovered(b, lower);
    total.value += term.value;
    var += term.std_error * term.std_error;
    n_samples = std::max(n_samples, term.n_samples);
  }
  total.std_error = std::sqrt(var);
  total.n_samples = n_samples;
  return total;
}

struct Arc {
  double a;
  double b;
};

}  // namespace

void QuadratureSpec::validate() const {
  if (!(points_per_unit_volume > 0.0)) throw std::invalid_argument("quadrature: points_per_unit_volume must be > 0");
  if (!(target_rel_error > 0.0)) throw std::invalid_argument("quadrature: target_rel_error must be > 0");
  if (replicates < 2) throw std::invalid_argument("quadrature: need at least 2 replicates");
  if (min_points_per_axis < 1) throw std::invalid_argument("quadrature: min_points_per_axis must be >= 1");
}

std::vector<Ball> Metric::images_meeting(const Ball& ball, const Ball& around) const {
  std::vector<Ball> out;
  const double reach = ball.radius + around.radius;
  if (!torus_) {
    if ((ball.center - around.center).norm() < reach) out.push_back(ball);
    return out;
  }
  const double L = torus_->side();
  const Point base = around.center + torus_->displacement(around.center, ball.center);
  const int m = static_cast<int>(std::ceil(reach / L));
  for_each_offset(static_cast<int>(base.size()), m, [&](const Point& k) {
    Point c = base + L * k;
    if ((c - around.center).norm() < reach) out.push_back({std::move(c), ball.radius});
  });
  return out;
}

namespace detail {

Estimate box_quadrature(int d, const Point& lo, double side, const QuadratureSpec& quad, Rng& rng,
                        const std::function<double(const Point&)>& integrand) {
  quad.validate();
  const int R = quad.replicates;
  const double box_volume = std::pow(side, d);
  const double wanted = quad.points_per_unit_volume * box_volume / R;
  const int m = std::max(quad.min_points_per_axis, static_cast<int>(std::ceil(std::pow(wanted, 1.0 / d))));
  const double h = side / m;
  long cells = 1;
  for (int i = 0; i < d; ++i) cells *= m;

  std::vector<double> reps(R);
  Point p(d);
  Point u(d);
  std::array<int, 3> idx{0, 0, 0};
  for (int rep = 0; rep < R; ++rep) {
    for (int i = 0; i < d; ++i) u[i] = uniform01(rng);
    double acc = 0.0;
    idx = {0, 0, 0};
    for (long c = 0; c < cells; ++c) {
      if (quad.scheme == QuadratureScheme::Stratified) {
        for (int i = 0; i < d; ++i) u[i] = uniform01(rng);
      }
      for (int i = 0; i < d; ++i) p[i] = lo[i] + (idx[i] + u[i]) * h;
      acc += integrand(p);
      for (int i = 0; i < d; ++i) {
        if (++idx[i] < m) break;
        idx[i] = 0;
      }
    }
    reps[rep] = box_volume * acc / static_cast<double>(cells);
  }
  const double mean = std::accumulate(reps.begin(), reps.end(), 0.0) / R;
  double ss = 0.0;
  for (double v : reps) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (R - 1) / R);
  return {mean, se, static_cast<std::size_t>(R) * static_cast<std::size_t>(cells)};
}

}  // namespace detail

double pair_intersection_volume(int d, const Ball& a, const Ball& b, const Metric& metric) {
  check_dim(d);
  check_balls(d, {a, b});
  double acc = 0.0;
  for (const auto& img : metric.images_meeting(b, a)) {
    acc += lens_volume(d, a.radius, img.radius, (img.center - a.center).norm());
  }
  return acc;
}

Estimate k_intersection_volume(int d, const std::vector<Ball>& balls, const QuadratureSpec& quad, Rng& rng,
                               const Metric& metric) {
  check_dim(d);
  check_balls(d, balls);
  if (balls.empty()) throw std::invalid_argument("k_intersection_volume: need at least one ball");
  if (balls.size() == 1) return Estimate::exact(ball_volume(d, balls[0].radius));
  for (std::size_t i = 0; i < balls.size(); ++i) {
    if (balls[i].radius == 0.0) return Estimate::exact(0.0);
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      if (metric.distance(balls[i].center, balls[j].center) >= balls[i].radius + balls[j].radius) {
        return Estimate::exact(0.0);
      }
    }
  }
  if (balls.size() == 2) return Estimate::exact(pair_intersection_volume(d, balls[0], balls[1], metric));
  check_injective(metric, balls);

  const auto smallest = std::min_element(balls.begin(), balls.end(),
                                         [](const Ball& a, const Ball& b) { return a.radius < b.radius; });
  const Ball& s = *smallest;
  const Point lo = s.center.array() - s.radius;
  return detail::box_quadrature(d, lo, 2.0 * s.radius, quad, rng, [&](const Point& p) {
    for (const auto& b : balls) {
      if (metric.distance(p, b.center) > b.radius) return 0.0;
    }
    return 1.0;
  });
}

Estimate union_volume(int d, const std::vector<Ball>& balls, const std::vector<Ball>& minus,
                      const QuadratureSpec& quad, Rng& rng, const Metric& metric) {
  check_dim(d);
  check_balls(d, balls);
  check_balls(d, minus);
  check_injective(metric, balls);
  if (d == 1) return Estimate::exact(union_volume_exact(d, balls, minus, metric));

  auto run = [&](const QuadratureSpec& q) {
    return owner_decomposition(balls, minus, metric, [&](const Ball& b, const std::vector<Ball>& lower) {
      return uncovered_quadrature(d, b, lower, q, rng);
    });
  };
  if (!quad.adaptive) return run(quad);

  QuadratureSpec q = quad;
  Estimate prev = run(q);
  for (int i = 0; i < quad.max_doublings; ++i) {
    q.points_per_unit_volume *= 2.0;
    Estimate next = run(q);
    const bool agree = std::abs(next.value - prev.value) <= quad.target_rel_error * std::abs(next.value);
    prev = next;
    if (agree) break;
  }
  return prev;
}

double interval_union_length(const std::vector<Ball>& intervals) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(intervals.size());
  for (const auto& b : intervals) {
    if (b.radius > 0.0) iv.emplace_back(b.center[0] - b.radius, b.center[0] + b.radius);
  }
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  double cur_lo = 0.0, cur_hi = 0.0;
  bool open = false;
  for (const auto& [lo, hi] : iv) {
    if (!open || lo > cur_hi) {
      if (open) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
      open = true;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (open) total += cur_hi - cur_lo;
  return total;
}

double disk_union_area(const std::vector<Ball>& disks_in) {
  std::vector<Ball> disks;
  for (const auto& b : disks_in) {
    if (b.radius > 0.0) disks.push_back(b);
  }
  if (disks.empty()) return 0.0;
  // Work relative to the first center to limit cancellation in the boundary integral.
  const Point origin = disks[0].center;
  for (auto& b : disks) b.center -= origin;

  const std::size_t n = disks.size();
  std::vector<char> hidden(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && !hidden[i]; ++j) {
      if (i == j || hidden[j]) continue;
      const double dist = (disks[i].center - disks[j].center).norm();
      const bool same = dist == 0.0 && disks[i].radius == disks[j].radius;
      if (same ? j < i : dist + disks[i].radius <= disks[j].radius) hidden[i] = 1;
    }
  }

  double area = 0.0;
  std::vector<Arc> covered;
  for (std::size_t i = 0; i < n; ++i) {
    if (hidden[i]) continue;
    const Ball& c = disks[i];
    covered.clear();
    bool swallowed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || hidden[j]) continue;
      const Point diff = disks[j].center - c.center;
      const double dist = diff.norm();
      if (dist >= c.radius + disks[j].radius) continue;
      if (dist + disks[j].radius <= c.radius) continue;
      if (dist + c.radius <= disks[j].radius) {
        swallowed = true;
        break;
      }
      const double alpha = std::atan2(diff[1], diff[0]);
      const double cosv =
          (c.radius * c.radius + dist * dist - disks[j].radius * disks[j].radius) / (2.0 * c.radius * dist);
      const double theta = std::acos(std::clamp(cosv, -1.0, 1.0));
      double a = alpha - theta;
      a = std::fmod(a, kTwoPi);
      if (a < 0.0) a += kTwoPi;
      const double b = a + 2.0 * theta;
      if (b > kTwoPi) {
        covered.push_back({a, kTwoPi});
        covered.push_back({0.0, b - kTwoPi});
      } else {
        covered.push_back({a, b});
      }
    }
    if (swallowed) continue;
    std::sort(covered.begin(), covered.end(), [](const Arc& x, const Arc& y) { return x.a < y.a; });
    auto add_arc = [&](double a, double b) {
      if (b <= a) return;
      area += 0.5 * (c.radius * c.radius * (b - a) + c.center[0] * c.radius * (std::sin(b) - std::sin(a)) -
                     c.center[1] * c.radius * (std::cos(b) - std::cos(a)));
    };
    double cursor = 0.0;
    for (const auto& arc : covered) {
      if (arc.a > cursor) add_arc(cursor, arc.a);
      cursor = std::max(cursor, arc.b);
    }
    add_arc(cursor, kTwoPi);
  }
  return area;
}

double uncovered_volume_exact(int d, const Ball& ball, const std::vector<Ball>& others) {
  if (d > 2) throw std::invalid_argument("uncovered_volume_exact: only d <= 2");
  if (ball.radius == 0.0) return 0.0;
  std::vector<Ball> near;
  for (const auto& o : others) {
    if (o.radius > 0.0 && (o.center - ball.center).norm() < ball.radius + o.radius) near.push_back(o);
  }
  bool done = false;
  const double closed = uncovered_closed_form(d, ball, near, done);
  if (done) return closed;
  const auto measure = [d](const std::vector<Ball>& bs) {
    return d == 1 ? interval_union_length(bs) : disk_union_area(bs);
  };
  const double without = measure(near);
  near.push_back(ball);
  const double with = measure(near);
  return std::clamp(with - without, 0.0, ball_volume(d, ball.radius));
}

Estimate uncovered_volume(int d, const Ball& ball, const std::vector<Ball>& others, const QuadratureSpec& quad,
                          Rng& rng) {
  check_dim(d);
  if (d <= 2 && (d == 1 || quad.exact_when_available)) return Estimate::exact(uncovered_volume_exact(d, ball, others));
  std::vector<Ball> near;
  for (const auto& o : others) {
    if (o.radius > 0.0 && (o.center - ball.center).norm() < ball.radius + o.radius) near.push_back(o);
  }
  return uncovered_quadrature(d, ball, near, quad, rng);
}

double union_volume_exact(int d, const std::vector<Ball>& balls, const std::vector<Ball>& minus,
                          const Metric& metric) {
  check_dim(d);
  if (d > 2) throw std::invalid_argument("union_volume_exact: only d <= 2");
  check_balls(d, balls);
  check_balls(d, minus);
  check_injective(metric, balls);
  if (!metric.is_torus() && minus.empty()) {
    return d == 1 ? interval_union_length(balls) : disk_union_area(balls);
  }
  return owner_decomposition(balls, minus, metric, [&](const Ball& b, const std::vector<Ball>& lower) {
           return Estimate::exact(uncovered_volume_exact(d, b, lower));
         })
      .value;
}

double k_intersection_volume_exact(int d, const std::vector<Ball>& balls) {
  check_dim(d);
  if (d > 2) throw std::invalid_argument("k_intersection_volume_exact: only d <= 2");
  check_balls(d, balls);
  const std::size_t k = balls.size();
  if (k == 0) throw std::invalid_argument("k_intersection_volume_exact: need at least one ball");
  if (k > 20) throw std::invalid_argument("k_intersection_volume_exact: too many balls");
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if ((balls[i].center - balls[j].center).norm() >= balls[i].radius + balls[j].radius) return 0.0;
    }
  }
  if (k == 1) return ball_volume(d, balls[0].radius);
  if (k == 2) {
    return lens_volume(d, balls[0].radius, balls[1].radius, (balls[0].center - balls[1].center).norm());
  }
  double acc = 0.0;
  std::vector<Ball> subset;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) subset.push_back(balls[i]);
    }
    const double u = d == 1 ? interval_union_length(subset) : disk_union_area(subset);
    acc += (subset.size() % 2 == 1 ? 1.0 : -1.0) * u;
  }
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& b : balls) smallest = std::min(smallest, ball_volume(d, b.radius));
  return std::clamp(acc, 0.0, smallest);
}

double critical_ratio(int d) {
  switch (d) {
    case 2:
      return std::sqrt(2.0) - 1.0;
    case 3:
      return std::sqrt(1.5) - 1.0;
    default:
      throw std::invalid_argument("critical_ratio: defined for d = 2 and d = 3 only");
  }
}

}  // namespace aogibbs
