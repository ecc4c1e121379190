#pragma once

#include "aogibbs/configuration.hpp"
#include "aogibbs/geometry.hpp"
#include "oracles/union_area.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <vector>

namespace testing_support {

using namespace aogibbs;

/// Up to n points with radii uniform on [r_lo, r_hi], uniform in the window, hardcore by rejection
/// (torus distance when the window is a torus).
inline Configuration random_hardcore(const Window& w, int n, double r_lo, double r_hi, Rng& rng,
                                     int max_tries = 2000) {
  Configuration c(w.dim());
  const Point lo = w.lower();
  for (int tries = 0; tries < max_tries && static_cast<int>(c.size()) < n; ++tries) {
    MarkedPoint p{Point(w.dim()), r_lo + (r_hi - r_lo) * uniform01(rng)};
    for (int i = 0; i < w.dim(); ++i) p.x[i] = lo[i] + w.side() * uniform01(rng);
    if (!w.contains(p.x)) continue;
    bool ok = !(w.torus() && 2.0 * p.radius >= w.side());
    for (const auto& q : c) {
      if (w.distance(p.x, q.x) <= p.radius + q.radius) ok = false;
    }
    if (ok) c.insert(p);
  }
  return c;
}

inline std::vector<oracle::Disk> disks(const Configuration& c, double r) {
  std::vector<oracle::Disk> out;
  for (const auto& p : c) out.push_back({p.x[0], p.x[1], p.radius + r});
  return out;
}

inline std::vector<Ball> enlarged(const Configuration& c, double r) {
  std::vector<Ball> out;
  for (const auto& p : c) out.push_back({p.x, p.radius + r});
  return out;
}

/// Pearson chi-square p-value of observed counts against cell probabilities. Cells with zero
/// probability must be empty; a nonempty one gives p = 0.
inline double chi_square_p(const std::vector<long>& observed, const std::vector<double>& probs) {
  long n = 0;
  for (long c : observed) n += c;
  double stat = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double p = k < probs.size() ? probs[k] : 0.0;
    if (p <= 0.0) {
      if (observed[k] > 0) return 0.0;
      continue;
    }
    const double e = p * static_cast<double>(n);
    stat += (static_cast<double>(observed[k]) - e) * (static_cast<double>(observed[k]) - e) / e;
    ++cells;
  }
  if (cells < 2) return 1.0;
  boost::math::chi_squared law(cells - 1);
  return boost::math::cdf(boost::math::complement(law, stat));
}

/// Brute-force hardcore check; torus distance when the window is a torus.
inline bool overlaps_brute(const Configuration& c, const Window& w) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (w.distance(c[i].x, c[j].x) <= c[i].radius + c[j].radius) return true;
    }
  }
  return false;
}

}  // namespace testing_support
