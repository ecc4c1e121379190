#include "aogibbs/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <functional>

namespace aogibbs {

namespace {

bool use_exact(int d, const QuadratureSpec& quad) { return d == 1 || (d == 2 && quad.exact_when_available); }

}  // namespace

BoundaryCondition BoundaryCondition::fixed(Configuration outer) {
  return {Kind::Fixed, std::make_shared<const Configuration>(std::move(outer))};
}

std::string BoundaryCondition::name() const {
  switch (kind) {
    case Kind::Free:
      return "free";
    case Kind::Periodic:
      return "periodic";
    case Kind::Fixed:
      return "fixed";
  }
  return "unknown";
}

Hamiltonian::Hamiltonian(const Window& window, BoundaryCondition bc, double r, QuadratureSpec quad)
    : window_(window.with_torus(bc.kind == BoundaryCondition::Kind::Periodic)),
      bc_(std::move(bc)),
      r_(r),
      quad_(quad),
      boundary_(window.dim()) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("polymer radius r must be > 0");
  quad_.validate();
  if (bc_.kind == BoundaryCondition::Kind::Fixed) {
    if (!bc_.outer) throw std::invalid_argument("fixed boundary condition needs an outer configuration");
    if (bc_.outer->dim() != window.dim()) throw std::invalid_argument("boundary configuration has wrong dimension");
    boundary_ = restrict_complement(*bc_.outer, window_);
  }
  boundary_.set_index_hint(r_, window_.side() / 64.0);
}

bool Hamiltonian::in_window(const Point& x) const { return window_.contains(x); }

bool Hamiltonian::overlaps(const Configuration& config, const MarkedPoint& p, std::optional<std::size_t> skip) const {
  const double s = p.radius + config.max_radius();
  if (bc_.kind == BoundaryCondition::Kind::Periodic) {
    if (window_.side() <= 2.0 * p.radius) return true;  // the point meets its own translate
    for (const auto& img : periodic_neighbors(config, window_, p.x, s)) {
      if (skip && img.index == *skip) continue;
      if ((img.position - p.x).norm() <= p.radius + img.radius) return true;
    }
    return false;
  }
  for (std::size_t j : config.neighbors(p.x, s)) {
    if (skip && j == *skip) continue;
    const auto& q = config[j];
    if (!in_window(q.x)) continue;
    if ((q.x - p.x).norm() <= p.radius + q.radius) return true;
  }
  if (bc_.kind == BoundaryCondition::Kind::Fixed) {
    for (std::size_t j : boundary_.neighbors(p.x, p.radius + boundary_.max_radius())) {
      const auto& q = boundary_[j];
      if ((q.x - p.x).norm() <= p.radius + q.radius) return true;
    }
  }
  return false;
}

std::vector<Ball> Hamiltonian::boundary_balls_near(const Ball& ball) const {
  std::vector<Ball> out;
  if (boundary_.empty()) return out;
  for (std::size_t j : boundary_.neighbors(ball.center, ball.radius + boundary_.max_radius() + r_)) {
    const auto& q = boundary_[j];
    if ((q.x - ball.center).norm() < ball.radius + q.radius + r_) out.push_back({q.x, q.radius + r_});
  }
  return out;
}

Estimate Hamiltonian::uncovered(const Configuration& config, const MarkedPoint& p, std::optional<std::size_t> skip,
                                Rng& rng) const {
  const int d = window_.dim();
  const Ball ball{p.x, p.radius + r_};
  const double s = ball.radius + config.max_radius() + r_;
  std::vector<Ball> others;
  if (bc_.kind == BoundaryCondition::Kind::Periodic) {
    if (2.0 * ball.radius > window_.side()) {
      throw std::invalid_argument("periodic energy: enlarged ball wider than the torus");
    }
    for (const auto& img : periodic_neighbors(config, window_, p.x, s)) {
      if (skip && img.index == *skip) continue;
      if ((img.position - p.x).norm() < ball.radius + img.radius + r_) others.push_back({img.position, img.radius + r_});
    }
  } else {
    for (std::size_t j : config.neighbors(p.x, s)) {
      if (skip && j == *skip) continue;
      const auto& q = config[j];
      if (!in_window(q.x)) continue;
      if ((q.x - p.x).norm() < ball.radius + q.radius + r_) others.push_back({q.x, q.radius + r_});
    }
    auto outer = boundary_balls_near(ball);
    others.insert(others.end(), outer.begin(), outer.end());
  }
  return uncovered_volume(d, ball, others, quad_, rng);
}

EnergyValue Hamiltonian::local_energy(const Configuration& config, const MarkedPoint& p,
                                      std::optional<std::size_t> skip, Rng& rng) const {
  validate_point(p, window_.dim());
  if (overlaps(config, p, skip)) return EnergyValue::infinite();
  return EnergyValue::from(uncovered(config, p, skip, rng));
}

EnergyValue Hamiltonian::delta_insert(const Configuration& config, const MarkedPoint& p, Rng& rng) const {
  validate_point(p, window_.dim());
  if (!in_window(p.x)) throw std::invalid_argument("energy_delta_insert: new point must lie in the window");
  return local_energy(config, p, std::nullopt, rng);
}

Estimate Hamiltonian::delta_delete(const Configuration& config, std::size_t i, Rng& rng) const {
  if (i >= config.size()) throw std::out_of_range("energy_delta_delete: no such point");
  return -1.0 * uncovered(config, config[i], i, rng);
}

std::optional<Estimate> Hamiltonian::delta_replace(const Configuration& config, std::size_t i, const MarkedPoint& p,
                                                   Rng& rng) const {
  if (i >= config.size()) throw std::out_of_range("energy delta: no such point");
  validate_point(p, window_.dim());
  if (overlaps(config, p, i)) return std::nullopt;
  return uncovered(config, p, i, rng) - uncovered(config, config[i], i, rng);
}

std::vector<Ball> Hamiltonian::enlarged_inner(const Configuration& config) const {
  std::vector<Ball> balls;
  balls.reserve(config.size());
  for (const auto& p : config) {
    if (bc_.kind == BoundaryCondition::Kind::Periodic) {
      if (!in_window(p.x)) throw std::invalid_argument("periodic energy: configuration has points outside the window");
    } else if (!in_window(p.x)) {
      continue;
    }
    balls.push_back({p.x, p.radius + r_});
  }
  return balls;
}

bool Hamiltonian::hardcore_violated(const Configuration& config) const {
  if (config.dim() != window_.dim()) throw std::invalid_argument("configuration has wrong dimension");
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto& p = config[i];
    if (!in_window(p.x)) {
      if (bc_.kind == BoundaryCondition::Kind::Periodic) {
        throw std::invalid_argument("periodic energy: configuration has points outside the window");
      }
      continue;
    }
    if (overlaps(config, p, i)) return true;
  }
  return false;
}

Estimate Hamiltonian::area_energy(const Configuration& config, Rng& rng) const {
  if (config.dim() != window_.dim()) throw std::invalid_argument("configuration has wrong dimension");
  const int d = window_.dim();
  const std::vector<Ball> balls = enlarged_inner(config);
  if (balls.empty()) return Estimate::exact(0.0);

  std::vector<Ball> minus;
  if (bc_.kind == BoundaryCondition::Kind::Fixed && !boundary_.empty()) {
    std::vector<char> taken(boundary_.size(), 0);
    for (const auto& b : balls) {
      for (std::size_t j : boundary_.neighbors(b.center, b.radius + boundary_.max_radius() + r_)) {
        const auto& q = boundary_[j];
        if (taken[j] || (q.x - b.center).norm() >= b.radius + q.radius + r_) continue;
        taken[j] = 1;
        minus.push_back({q.x, q.radius + r_});
      }
    }
  }
  const Metric m = metric();
  if (use_exact(d, quad_)) return Estimate::exact(union_volume_exact(d, balls, minus, m));
  return union_volume(d, balls, minus, quad_, rng, m);
}

EnergyValue Hamiltonian::conditional_energy(const Configuration& config, Rng& rng) const {
  if (hardcore_violated(config)) return EnergyValue::infinite();
  return EnergyValue::from(area_energy(config, rng));
}

bool hardcore_violated(const Configuration& config, const Window& window, const BoundaryCondition& bc) {
  // The polymer radius plays no role in the hardcore term.
  return Hamiltonian(window, bc, 1.0).hardcore_violated(config);
}

Estimate area_energy(const Configuration& config, const Window& window, const BoundaryCondition& bc, double r,
                     const QuadratureSpec& quad, Rng& rng) {
  return Hamiltonian(window, bc, r, quad).area_energy(config, rng);
}

EnergyValue conditional_energy(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                               double r, const QuadratureSpec& quad, Rng& rng) {
  return Hamiltonian(window, bc, r, quad).conditional_energy(config, rng);
}

EnergyValue energy_delta_insert(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                                const MarkedPoint& p, double r, const QuadratureSpec& quad, Rng& rng) {
  return Hamiltonian(window, bc, r, quad).delta_insert(config, p, rng);
}

Estimate energy_delta_delete(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                             std::size_t i, double r, const QuadratureSpec& quad, Rng& rng) {
  return Hamiltonian(window, bc, r, quad).delta_delete(config, i, rng);
}

std::vector<KBodyTerm> kbody_expansion(const Configuration& config, double r, int k_max, const QuadratureSpec& quad,
                                       Rng& rng) {
  const std::size_t n = config.size();
  if (n > 10) throw std::invalid_argument("kbody_expansion: at most 10 points");
  if (k_max < 1) throw std::invalid_argument("kbody_expansion: k_max must be >= 1");
  if (!(r >= 0.0)) throw std::invalid_argument("kbody_expansion: r must be >= 0");
  const int d = config.dim();

  std::vector<Ball> balls;
  for (const auto& p : config) balls.push_back({p.x, p.radius + r});
  std::vector<std::uint32_t> adjacent(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && (balls[i].center - balls[j].center).norm() < balls[i].radius + balls[j].radius) {
        adjacent[i] |= 1u << j;
      }
    }
  }

  std::vector<KBodyTerm> terms;
  std::vector<double> var(k_max + 1, 0.0);
  for (int k = 1; k <= k_max; ++k) terms.push_back({k, Estimate::exact(0.0)});

  std::vector<Ball> subset;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    if (k > k_max) continue;
    bool clique = true;
    for (std::size_t i = 0; i < n && clique; ++i) {
      if ((mask & (1u << i)) && (mask & ~(1u << i) & ~adjacent[i])) clique = false;
    }
    if (!clique) continue;
    subset.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(balls[i]);
    }
    Estimate v;
    if (k >= 3 && d <= 2 && quad.exact_when_available) {
      v = Estimate::exact(k_intersection_volume_exact(d, subset));
    } else {
      v = k_intersection_volume(d, subset, quad, rng);
    }
    const double sign = k % 2 == 1 ? 1.0 : -1.0;
    auto& t = terms[k - 1].signed_sum;
    t.value += sign * v.value;
    var[k] += v.std_error * v.std_error;
    t.n_samples = std::max(t.n_samples, v.n_samples);
  }
  for (int k = 1; k <= k_max; ++k) terms[k - 1].signed_sum.std_error = std::sqrt(var[k]);
  return terms;
}

Estimate xwise_palm_summand(const Configuration& config, std::size_t i, double r, const QuadratureSpec& quad,
                            Rng& rng, const Metric& metric) {
  if (i >= config.size()) throw std::out_of_range("xwise_palm_summand: no such point");
  const int d = config.dim();
  const Ball ball{config[i].x, config[i].radius + r};
  if (metric.is_torus() && 2.0 * ball.radius > metric.window().side()) {
    throw std::invalid_argument("xwise_palm_summand: enlarged ball wider than the torus");
  }
  std::vector<Ball> others;
  for (std::size_t j = 0; j < config.size(); ++j) {
    if (j == i) continue;
    for (auto& img : metric.images_meeting({config[j].x, config[j].radius + r}, ball)) others.push_back(std::move(img));
  }
  const double full = ball_volume(d, ball.radius);
  if (others.empty()) return Estimate::exact(full);

  if (d == 1) {
    const double lo = ball.center[0] - ball.radius;
    const double hi = ball.center[0] + ball.radius;
    std::vector<double> cuts{lo, hi};
    for (const auto& o : others) {
      cuts.push_back(std::clamp(o.center[0] - o.radius, lo, hi));
      cuts.push_back(std::clamp(o.center[0] + o.radius, lo, hi));
    }
    std::sort(cuts.begin(), cuts.end());
    double shared = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double len = cuts[k + 1] - cuts[k];
      if (len <= 0.0) continue;
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      int m = 0;
      for (const auto& o : others) m += std::abs(mid - o.center[0]) < o.radius;
      shared += len * m / (m + 1.0);
    }
    return Estimate::exact(full - shared);
  }

  if (d == 2 && quad.exact_when_available) {
    // m/(m+1) = sum_{k=1}^m (-1)^(k+1) C(m,k)/(k+1), so the shared part expands over cliques of neighbours.
    const std::size_t m = others.size();
    double shared = 0.0;
    std::vector<Ball> balls{ball};
    std::function<void(std::size_t)> grow = [&](std::size_t from) {
      for (std::size_t j = from; j < m; ++j) {
        bool ok = true;
        for (std::size_t q = 1; q < balls.size(); ++q) {
          ok = ok && (balls[q].center - others[j].center).norm() < balls[q].radius + others[j].radius;
        }
        if (!ok) continue;
        balls.push_back(others[j]);
        const int k = static_cast<int>(balls.size()) - 1;
        const double vol = k == 1 ? pair_intersection_volume(d, ball, others[j]) : k_intersection_volume_exact(d, balls);
        if (vol > 0.0) {
          shared += (k % 2 == 1 ? 1.0 : -1.0) / (k + 1) * vol;
          grow(j + 1);
        }
        balls.pop_back();
      }
    };
    grow(0);
    return Estimate::exact(full - shared);
  }

  const Point lo = ball.center.array() - ball.radius;
  const double r2 = ball.radius * ball.radius;
  const Estimate shared = detail::box_quadrature(d, lo, 2.0 * ball.radius, quad, rng, [&](const Point& z) {
    if ((z - ball.center).squaredNorm() > r2) return 0.0;
    int m = 0;
    for (const auto& o : others) m += (z - o.center).squaredNorm() <= o.radius * o.radius;
    return m / (m + 1.0);
  });
  return {full - shared.value, shared.std_error, shared.n_samples};
}

}  // namespace aogibbs
