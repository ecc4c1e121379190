#include "aogibbs/mark_law.hpp"

#include <sstream>

namespace aogibbs {

MarkLaw::MarkLaw(Kind kind, double a, double b, double c, double delta)
    : kind_(kind), a_(a), b_(b), c_(c), delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("mark law: delta must be > 0");
}

MarkLaw MarkLaw::dirac(double radius, double delta) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw std::invalid_argument("dirac mark law: radius must be >= 0");
  return MarkLaw(Kind::Dirac, radius, radius, radius, delta);
}

MarkLaw MarkLaw::uniform(double lo, double hi, double delta) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("uniform mark law: need 0 <= lo < hi < inf");
  }
  return MarkLaw(Kind::Uniform, lo, hi, hi, delta);
}

MarkLaw MarkLaw::truncated_weibull(double scale, double shape, double cutoff, double delta) {
  if (!(scale > 0.0) || !(shape > 0.0) || !(cutoff > 0.0) || !std::isfinite(cutoff)) {
    throw std::invalid_argument("truncated weibull mark law: scale, shape, cutoff must be > 0");
  }
  return MarkLaw(Kind::TruncatedWeibull, scale, shape, cutoff, delta);
}

double MarkLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Dirac:
      return a_;
    case Kind::Uniform:
      return a_ + (b_ - a_) * uniform01(rng);
    case Kind::TruncatedWeibull: {
      const double mass = -std::expm1(-std::pow(c_ / a_, b_));
      const double u = uniform01(rng);
      const double t = a_ * std::pow(-std::log1p(-u * mass), 1.0 / b_);
      return std::min(t, c_);
    }
  }
  return 0.0;
}

double MarkLaw::tail(double t) const {
  switch (kind_) {
    case Kind::Dirac:
      return t < a_ ? 1.0 : 0.0;
    case Kind::Uniform:
      if (t < a_) return 1.0;
      if (t >= b_) return 0.0;
      return (b_ - t) / (b_ - a_);
    case Kind::TruncatedWeibull: {
      if (t <= 0.0) return 1.0;
      if (t >= c_) return 0.0;
      const double ec = std::exp(-std::pow(c_ / a_, b_));
      return (std::exp(-std::pow(t / a_, b_)) - ec) / (1.0 - ec);
    }
  }
  return 0.0;
}

double MarkLaw::density(double t) const {
  switch (kind_) {
    case Kind::Dirac:
      return 0.0;
    case Kind::Uniform:
      return (t >= a_ && t < b_) ? 1.0 / (b_ - a_) : 0.0;
    case Kind::TruncatedWeibull: {
      if (t < 0.0 || t >= c_) return 0.0;
      const double ec = std::exp(-std::pow(c_ / a_, b_));
      const double u = t / a_;
      return (b_ / a_) * std::pow(u, b_ - 1.0) * std::exp(-std::pow(u, b_)) / (1.0 - ec);
    }
  }
  return 0.0;
}

double MarkLaw::max_radius() const {
  switch (kind_) {
    case Kind::Dirac:
      return a_;
    case Kind::Uniform:
      return b_;
    case Kind::TruncatedWeibull:
      return c_;
  }
  return 0.0;
}

double MarkLaw::min_radius() const { return kind_ == Kind::TruncatedWeibull ? 0.0 : a_; }

double MarkLaw::mean() const {
  switch (kind_) {
    case Kind::Dirac:
      return a_;
    case Kind::Uniform:
      return 0.5 * (a_ + b_);
    case Kind::TruncatedWeibull: {
      // E[R] = integral of the tail over [0, c]; composite Simpson is plenty here.
      const int n = 2000;
      const double h = c_ / n;
      double acc = tail(0.0) + tail(c_);
      for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * tail(i * h);
      return acc * h / 3.0;
    }
  }
  return 0.0;
}

std::string MarkLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Dirac:
      os << "dirac(" << a_ << ")";
      break;
    case Kind::Uniform:
      os << "uniform(" << a_ << "," << b_ << ")";
      break;
    case Kind::TruncatedWeibull:
      os << "weibull(" << a_ << "," << b_ << "," << c_ << ")";
      break;
  }
  os << ";delta=" << delta_;
  return os.str();
}

}  // namespace aogibbs
