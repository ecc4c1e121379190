#include "aogibbs/model.hpp"

namespace aogibbs {

void ModelParams::validate() const {
  check_dim(dim);
  if (!(z > 0.0) || !std::isfinite(z)) throw std::invalid_argument("activity z must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("inverse temperature beta must be > 0");
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("polymer radius r must be > 0");
}

TemperednessEnvelope TemperednessEnvelope::for_params(const ModelParams& params, std::optional<double> gamma) {
  const double delta = params.marks.delta();
  const double g = gamma.value_or(delta / (2.0 * params.dim));
  if (!(g > 0.0) || !(g < delta / params.dim)) {
    throw std::invalid_argument("temperedness gamma must lie in (0, delta/d)");
  }
  return {params.dim, delta, g};
}

double TemperednessEnvelope::epsilon() const {
  return (1.0 - gamma * dim / delta) * delta / (dim + delta);
}

long shell_index(const Point& x) {
  // x in Lambda_n iff -n/2 <= x_i < n/2, i.e. n > 2 x_i and n >= -2 x_i.
  long n = 1;
  for (int i = 0; i < x.size(); ++i) {
    const double up = 2.0 * x[i];
    const long need_up = static_cast<long>(std::floor(up)) + 1;
    const long need_down = static_cast<long>(std::ceil(-2.0 * x[i]));
    n = std::max({n, need_up, need_down});
  }
  return n;
}

std::optional<std::size_t> first_untempered(const Configuration& config, long K, const TemperednessEnvelope& env,
                                            long M) {
  for (std::size_t i = 0; i < config.size(); ++i) {
    const long m = shell_index(config[i].x);
    if (m > M) continue;
    if (config[i].radius > env.g(static_cast<double>(std::max(K, m)))) return i;
  }
  return std::nullopt;
}

bool in_tempered_set(const Configuration& config, long K, const TemperednessEnvelope& env, long M) {
  return !first_untempered(config, K, env, M).has_value();
}

long envelope_saturation_level(const MarkLaw& marks, const TemperednessEnvelope& env) {
  const double top = marks.max_radius();
  if (!std::isfinite(top)) throw std::invalid_argument("envelope saturation needs a bounded mark law");
  // g(n) = n^{1-eps} >= top  <=>  n >= top^{1/(1-eps)}
  long n = std::max(1L, static_cast<long>(std::ceil(std::pow(top, 1.0 / (1.0 - env.epsilon())))));
  while (n > 1 && env.g(static_cast<double>(n - 1)) >= top) --n;
  while (env.g(static_cast<double>(n)) < top) ++n;
  return n;
}

double poisson_tempered_probability(const ModelParams& params, const TemperednessEnvelope& env, long N,
                                    std::optional<long> M) {
  if (N < 1) throw std::invalid_argument("tempered probability: N must be >= 1");
  const long last = M ? *M : std::max(N, envelope_saturation_level(params.marks, env));
  if (last < N) throw std::invalid_argument("tempered probability: need M >= N");
  const int d = params.dim;
  auto vol = [d](long n) { return std::pow(static_cast<double>(n), d); };
  double expo = params.z * vol(N) * params.marks.tail(env.g(static_cast<double>(N)));
  for (long n = N + 1; n <= last; ++n) {
    expo += params.z * (vol(n) - vol(n - 1)) * params.marks.tail(env.g(static_cast<double>(n)));
  }
  return std::exp(-expo);
}

}  // namespace aogibbs
