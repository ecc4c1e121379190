#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace aogibbs {

/// Position vector with runtime dimension d <= 3, stored inline (no heap).
template <typename Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Point = PointT<double>;

using Rng = std::mt19937_64;

inline constexpr int kMaxDim = 3;

inline void check_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw std::invalid_argument("dimension must be 1, 2 or 3, got " + std::to_string(d));
  }
}

template <typename Scalar = double>
PointT<Scalar> make_point(std::initializer_list<Scalar> coords) {
  PointT<Scalar> p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (Scalar c : coords) p[i++] = c;
  return p;
}

inline Point zero_point(int d) { return Point::Zero(d); }

/// Monte Carlo or quadrature estimate with its 1-sigma standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 1;

  static Estimate exact(double v) { return {v, 0.0, 1}; }

  double z_score(double reference) const {
    const double diff = value - reference;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
};

inline Estimate operator+(const Estimate& a, const Estimate& b) {
  return {a.value + b.value, std::hypot(a.std_error, b.std_error),
          std::min(a.n_samples, b.n_samples)};
}

inline Estimate operator-(const Estimate& a, const Estimate& b) {
  return {a.value - b.value, std::hypot(a.std_error, b.std_error),
          std::min(a.n_samples, b.n_samples)};
}

inline Estimate operator*(double s, const Estimate& a) {
  return {s * a.value, std::abs(s) * a.std_error, a.n_samples};
}

/// Deterministic 64-bit seed derivation (SplitMix64 finalizer over seed and stream tag).
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(split_seed(seed, stream));
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace aogibbs
