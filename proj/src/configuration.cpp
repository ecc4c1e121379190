#include "aogibbs/configuration.hpp"

#include <algorithm>

namespace aogibbs {

void validate_point(const MarkedPoint& p, int dim) {
  if (p.x.size() != dim) throw std::invalid_argument("marked point has wrong dimension");
  if (!p.x.allFinite()) throw std::invalid_argument("marked point position must be finite");
  if (!(p.radius >= 0.0) || !std::isfinite(p.radius)) {
    throw std::invalid_argument("marked point radius must be finite and >= 0");
  }
}

Configuration::Configuration(int dim) : dim_(dim) { check_dim(dim); }

Configuration::Configuration(int dim, std::vector<MarkedPoint> points) : Configuration(dim) {
  for (auto& p : points) {
    if (!insert(p)) throw std::invalid_argument("configuration is not simple: repeated position");
  }
}

std::array<std::int64_t, 3> Configuration::cell_coords(const Point& x) const {
  std::array<std::int64_t, 3> c{0, 0, 0};
  for (int i = 0; i < dim_; ++i) c[i] = static_cast<std::int64_t>(std::floor(x[i] / cell_));
  return c;
}

Configuration::CellKey Configuration::key_of_cell(const std::array<std::int64_t, 3>& c) const {
  // 21 bits per axis, wrapping; collisions only merge far-apart cells, never drop points.
  constexpr std::uint64_t mask = (1ULL << 21) - 1;
  return ((static_cast<std::uint64_t>(c[0]) & mask) << 42) | ((static_cast<std::uint64_t>(c[1]) & mask) << 21) |
         (static_cast<std::uint64_t>(c[2]) & mask);
}

Configuration::CellKey Configuration::key_of(const Point& x) const { return key_of_cell(cell_coords(x)); }

void Configuration::set_index_hint(double pad, double min_cell) {
  if (!(pad >= 0.0) || !(min_cell > 0.0)) throw std::invalid_argument("index hint: pad >= 0, min_cell > 0");
  pad_ = pad;
  min_cell_ = min_cell;
  rebuild();
}

void Configuration::rebuild() {
  cell_ = std::max(2.0 * (r_max_ + pad_), min_cell_);
  grid_.clear();
  keys_.assign(points_.size(), 0);
  for (std::size_t i = 0; i < points_.size(); ++i) index_point(i);
}

void Configuration::index_point(std::size_t i) {
  keys_[i] = key_of(points_[i].x);
  grid_[keys_[i]].push_back(static_cast<std::uint32_t>(i));
}

void Configuration::unindex_point(std::size_t i) {
  auto it = grid_.find(keys_[i]);
  auto& bucket = it->second;
  bucket.erase(std::find(bucket.begin(), bucket.end(), static_cast<std::uint32_t>(i)));
  if (bucket.empty()) grid_.erase(it);
}

void Configuration::recompute_max_radius() {
  r_max_ = 0.0;
  for (const auto& p : points_) r_max_ = std::max(r_max_, p.radius);
}

bool Configuration::contains_position(const Point& x) const {
  auto it = grid_.find(key_of(x));
  if (it == grid_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](std::uint32_t j) { return points_[j].x == x; });
}

bool Configuration::insert(const MarkedPoint& p) {
  validate_point(p, dim_);
  if (contains_position(p.x)) return false;
  points_.push_back(p);
  keys_.push_back(0);
  if (p.radius > r_max_) {
    r_max_ = p.radius;
    if (2.0 * (r_max_ + pad_) > cell_) {
      rebuild();
      return true;
    }
  }
  index_point(points_.size() - 1);
  return true;
}

void Configuration::erase(std::size_t i) {
  if (i >= points_.size()) throw std::out_of_range("configuration: erase index out of range");
  const double removed = points_[i].radius;
  const std::size_t last = points_.size() - 1;
  unindex_point(i);
  if (i != last) {
    unindex_point(last);
    points_[i] = std::move(points_[last]);
    keys_[i] = keys_[last];
    grid_[keys_[i]].push_back(static_cast<std::uint32_t>(i));
  }
  points_.pop_back();
  keys_.pop_back();
  if (removed == r_max_) recompute_max_radius();
}

void Configuration::replace(std::size_t i, const MarkedPoint& p) {
  if (i >= points_.size()) throw std::out_of_range("configuration: replace index out of range");
  validate_point(p, dim_);
  if (p.x != points_[i].x && contains_position(p.x)) {
    throw std::invalid_argument("configuration: replace would duplicate a position");
  }
  const double old_radius = points_[i].radius;
  unindex_point(i);
  points_[i] = p;
  index_point(i);
  if (p.radius > r_max_) {
    r_max_ = p.radius;
    if (2.0 * (r_max_ + pad_) > cell_) rebuild();
  } else if (old_radius == r_max_ && p.radius < old_radius) {
    recompute_max_radius();
  }
}

void Configuration::clear() {
  points_.clear();
  keys_.clear();
  grid_.clear();
  r_max_ = 0.0;
}

void Configuration::for_each_candidate(const Point& x, double s, const std::function<void(std::size_t)>& f) const {
  if (points_.empty()) return;
  std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
  double cells = 1.0;
  for (int i = 0; i < dim_; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor((x[i] - s) / cell_));
    hi[i] = static_cast<std::int64_t>(std::floor((x[i] + s) / cell_));
    cells *= static_cast<double>(hi[i] - lo[i] + 1);
  }
  // Wide queries (or keys that would wrap) fall back to a scan.
  if (cells > static_cast<double>(std::max<std::size_t>(27, 2 * points_.size())) ||
      cells > static_cast<double>(1u << 20)) {
    for (std::size_t j = 0; j < points_.size(); ++j) f(j);
    return;
  }
  std::array<std::int64_t, 3> c{0, 0, 0};
  for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
    for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1]) {
      for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2]) {
        auto it = grid_.find(key_of_cell(c));
        if (it != grid_.end()) {
          for (std::uint32_t j : it->second) {
            if (cell_coords(points_[j].x) == c) f(j);
          }
        }
      }
    }
  }
}

std::vector<std::size_t> Configuration::neighbors(const Point& x, double s) const {
  std::vector<std::size_t> out;
  for_each_candidate(x, s, [&](std::size_t j) {
    if ((points_[j].x - x).norm() <= s) out.push_back(j);
  });
  std::sort(out.begin(), out.end());
  return out;
}

double count(const Configuration& config, const Window& window, MarkRange marks, Weight weight) {
  double acc = 0.0;
  for (const auto& p : config) {
    if (window.contains(p.x) && marks.contains(p.radius)) {
      acc += weight == Weight::One ? 1.0 : psi_weight(p.radius, config.dim());
    }
  }
  return acc;
}

Configuration restrict(const Configuration& config, const Window& window) {
  Configuration out(config.dim());
  for (const auto& p : config) {
    if (window.contains(p.x)) out.insert(p);
  }
  return out;
}

Configuration restrict_complement(const Configuration& config, const Window& window) {
  Configuration out(config.dim());
  for (const auto& p : config) {
    if (!window.contains(p.x)) out.insert(p);
  }
  return out;
}

Configuration concatenate(const Configuration& inner, const Window& window, const Configuration& outer) {
  if (inner.dim() != outer.dim()) throw std::invalid_argument("concatenate: dimension mismatch");
  Configuration out = restrict(inner, window);
  for (const auto& p : outer) {
    if (!window.contains(p.x)) out.insert(p);
  }
  return out;
}

Configuration shift(const Configuration& config, const Point& x) {
  Configuration out(config.dim());
  for (const auto& p : config) out.insert({p.x - x, p.radius});
  return out;
}

void for_each_offset(int dim, int m, const std::function<void(const Point&)>& f) {
  Point k = Point::Zero(dim);
  std::array<int, 3> c{-m, -m, -m};
  for (c[0] = -m; c[0] <= m; ++c[0]) {
    for (c[1] = (dim > 1 ? -m : 0); c[1] <= (dim > 1 ? m : 0); ++c[1]) {
      for (c[2] = (dim > 2 ? -m : 0); c[2] <= (dim > 2 ? m : 0); ++c[2]) {
        for (int i = 0; i < dim; ++i) k[i] = c[i];
        f(k);
      }
    }
  }
}

PeriodicView::PeriodicView(const Configuration& config, const Window& window)
    : config_(&config), window_(window.with_torus(true)) {
  if (config.dim() != window.dim()) throw std::invalid_argument("periodize: dimension mismatch");
  for (const auto& p : config) {
    if (!window_.contains(p.x)) throw std::invalid_argument("periodize: configuration has points outside the window");
  }
}

std::vector<Image> periodic_neighbors(const Configuration& config, const Window& window, const Point& x, double s) {
  std::vector<Image> out;
  const double L = window.side();
  const int m = static_cast<int>(std::ceil(s / L)) + 1;
  for_each_offset(window.dim(), m, [&](const Point& k) {
    const Point shifted = x - L * k;
    if (window.distance_to_box(shifted) > s) return;
    for (std::size_t j : config.neighbors(shifted, s)) {
      const auto& p = config[j];
      out.push_back({j, p.x + L * k, p.radius, k.isZero()});
    }
  });
  std::sort(out.begin(), out.end(), [](const Image& a, const Image& b) {
    if (a.index != b.index) return a.index < b.index;
    return std::lexicographical_compare(a.position.data(), a.position.data() + a.position.size(),
                                        b.position.data(), b.position.data() + b.position.size());
  });
  return out;
}

std::vector<Image> PeriodicView::neighbors(const Point& x, double s) const {
  return periodic_neighbors(*config_, window_, x, s);
}

Configuration PeriodicView::materialize(double reach) const {
  Configuration out(window_.dim());
  const double L = window_.side();
  const int m = static_cast<int>(std::ceil(reach / L)) + 1;
  for (const auto& p : *config_) {
    for_each_offset(window_.dim(), m, [&](const Point& k) {
      const Point y = p.x + L * k;
      if (window_.distance_to_box(y) <= reach) out.insert({y, p.radius});
    });
  }
  return out;
}

PeriodicView periodize(const Configuration& config, const Window& window) { return PeriodicView(config, window); }

}  // namespace aogibbs
