#pragma once

#include "aogibbs/types.hpp"

#include <string>

namespace aogibbs {

/// Law of the radius marks.
///
/// The truncated Weibull-like law has tail
///   P(R > t) = (exp(-(t/s)^k) - exp(-(c/s)^k)) / (1 - exp(-(c/s)^k)),  0 <= t < c,
/// with scale s, shape k and cutoff c. `delta` is the exponent for which
/// E[exp(R^{d+delta})] < infinity is certified; every law here is bounded,
/// so any positive delta is admissible and it only feeds the temperedness envelope.
class MarkLaw {
 public:
  enum class Kind { Dirac, Uniform, TruncatedWeibull };

  static MarkLaw dirac(double radius, double delta = 1.0);
  static MarkLaw uniform(double lo, double hi, double delta = 1.0);
  static MarkLaw truncated_weibull(double scale, double shape, double cutoff, double delta = 1.0);

  Kind kind() const { return kind_; }
  double delta() const { return delta_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  double param_c() const { return c_; }

  double sample(Rng& rng) const;
  /// P(R > t).
  double tail(double t) const;
  /// Lebesgue density of the radius; zero for the Dirac law.
  double density(double t) const;
  /// Supremum of the support.
  double max_radius() const;
  double min_radius() const;
  double mean() const;

  std::string describe() const;

 private:
  MarkLaw(Kind kind, double a, double b, double c, double delta);

  Kind kind_;
  double a_;
  double b_;
  double c_;
  double delta_;
};

}  // namespace aogibbs
