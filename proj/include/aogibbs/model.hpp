#pragma once

#include "aogibbs/configuration.hpp"
#include "aogibbs/mark_law.hpp"

#include <optional>

namespace aogibbs {

struct ModelParams {
  int dim = 2;
  double z = 1.0;
  double beta = 1.0;
  double r = 0.1;
  MarkLaw marks = MarkLaw::dirac(0.5);

  void validate() const;
  ModelParams with_beta(double b) const {
    ModelParams p = *this;
    p.beta = b;
    return p;
  }
  ModelParams with_z(double a) const {
    ModelParams p = *this;
    p.z = a;
    return p;
  }
};

/// Radius envelope g(n) = n^{1 - eps} with eps = (1 - gamma d / delta) delta / (d + delta).
struct TemperednessEnvelope {
  int dim;
  double delta;
  double gamma;

  /// gamma defaults to delta / (2 d), the middle of the admissible range (0, delta/d).
  static TemperednessEnvelope for_params(const ModelParams& params,
                                         std::optional<double> gamma = std::nullopt);

  double epsilon() const;
  double g(double n) const { return std::pow(n, 1.0 - epsilon()); }
};

/// Smallest n >= 1 with x in Lambda_n = [-n/2, n/2)^d.
long shell_index(const Point& x);

/// Membership in {for all n in [K, M], all x in Lambda_n: R_x <= g(n)}; M defaults to infinity.
/// A point of shell index m is constrained by R_x <= g(max(K, m)) when m <= M.
bool in_tempered_set(const Configuration& config, long K, const TemperednessEnvelope& env,
                     long M = std::numeric_limits<long>::max());

/// First point violating the envelope from level K on, if any.
std::optional<std::size_t> first_untempered(const Configuration& config, long K,
                                            const TemperednessEnvelope& env,
                                            long M = std::numeric_limits<long>::max());

/// Poisson probability of the tempered event for levels N..M:
/// exp(-z |Lambda_N| P(R > g(N)) - z sum_{n=N+1}^{M} |Lambda_n \ Lambda_{n-1}| P(R > g(n))).
/// Without M the sum runs until g(n) passes the top of the mark support.
double poisson_tempered_probability(const ModelParams& params, const TemperednessEnvelope& env, long N,
                                    std::optional<long> M = std::nullopt);

/// Smallest level n with g(n) >= the largest possible radius (beyond it the envelope never binds).
long envelope_saturation_level(const MarkLaw& marks, const TemperednessEnvelope& env);

}  // namespace aogibbs
