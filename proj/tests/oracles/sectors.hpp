#pragma once

// Brute-force grand-canonical weights w_N = z^N / N! * int_{Lambda^N} exp(-beta H) for tiny windows
// in which the hardcore caps the particle number, so that the sum over N is finite and exact.
// Free boundary, Dirac marks. Everything is reduced to low-dimensional integrals over gaps or
// displacement vectors and handed to adaptive Gauss-Kronrod.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

namespace detail {

template <class F>
double gk(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-12);
}

/// Integral over [a, b] split at the given interior points.
template <class F>
double gk_split(F f, double a, double b, std::vector<double> cuts) {
  cuts.push_back(a);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = std::max(a, cuts[i]), hi = std::min(b, cuts[i + 1]);
    if (hi > lo) s += gk(f, lo, hi);
  }
  return s;
}

inline double disk_lens(double a, double dist) {
  if (dist >= 2.0 * a) return 0.0;
  return 2.0 * a * a * std::acos(dist / (2.0 * a)) - 0.5 * dist * std::sqrt(4.0 * a * a - dist * dist);
}

}  // namespace detail

/// d = 1, interval of length L, radius R, polymer radius r. Requires N <= 3 forced by the
/// hardcore (6R >= L) and r <= R so only neighbouring balls can meet.
inline std::vector<double> sector_weights_1d(double z, double beta, double L, double R, double r) {
  if (6.0 * R < L) throw std::invalid_argument("sector_weights_1d: four balls fit");
  if (r > R) throw std::invalid_argument("sector_weights_1d: r > R");
  const double a = R + r;
  const double one = 2.0 * a;
  auto gain = [&](double g) { return std::exp(beta * std::max(0.0, 2.0 * a - g)); };
  std::vector<double> w(4, 0.0);
  w[0] = 1.0;
  w[1] = z * L * std::exp(-beta * one);
  // Ordered points; (L - total gap) counts the positions of the leftmost point.
  w[2] = z * z * std::exp(-2.0 * beta * one) *
         detail::gk_split([&](double g) { return (L - g) * gain(g); }, 2.0 * R, L, {2.0 * a});
  w[3] = z * z * z * std::exp(-3.0 * beta * one) *
         detail::gk_split(
             [&](double g1) {
               return gain(g1) * detail::gk_split([&](double g2) { return (L - g1 - g2) * gain(g2); }, 2.0 * R,
                                                  L - g1, {2.0 * a});
             },
             2.0 * R, L - 2.0 * R, {2.0 * a});
  return w;
}

/// d = 2, square of side s, radius R, polymer radius r. Requires N <= 2 forced by the hardcore:
/// the largest minimal distance of three points in a square is (sqrt 6 - sqrt 2) s.
inline std::vector<double> sector_weights_2d(double z, double beta, double s, double R, double r) {
  if (2.0 * R <= (std::sqrt(6.0) - std::sqrt(2.0)) * s) throw std::invalid_argument("sector_weights_2d: three fit");
  const double a = R + r;
  const double pi = std::acos(-1.0);
  const double one = pi * a * a;
  std::vector<double> w(3, 0.0);
  w[0] = 1.0;
  w[1] = z * s * s * std::exp(-beta * one);
  // Displacement u = x - y has density (s - |u1|)(s - |u2|) on [-s, s]^2; fold to the first quadrant.
  auto f = [&](double u1, double u2) {
    const double dist = std::hypot(u1, u2);
    if (dist < 2.0 * R) return 0.0;
    return (s - u1) * (s - u2) * std::exp(-beta * (2.0 * one - detail::disk_lens(a, dist)));
  };
  auto cuts_for = [&](double u1) {
    std::vector<double> c;
    for (double D : {2.0 * R, 2.0 * a}) {
      if (D > u1) c.push_back(std::sqrt(D * D - u1 * u1));
    }
    return c;
  };
  const double inner = detail::gk_split(
      [&](double u1) { return detail::gk_split([&](double u2) { return f(u1, u2); }, 0.0, s, cuts_for(u1)); }, 0.0,
      s, {2.0 * R, 2.0 * a, std::sqrt(std::max(0.0, 4.0 * R * R - s * s)), std::sqrt(std::max(0.0, 4.0 * a * a - s * s))});
  w[2] = 0.5 * z * z * 4.0 * inner;
  return w;
}

inline std::vector<double> normalized(std::vector<double> w) {
  double t = 0.0;
  for (double x : w) t += x;
  for (double& x : w) x /= t;
  return w;
}

}  // namespace oracle
