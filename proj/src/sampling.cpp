#include "aogibbs/sampling.hpp"

#include "aogibbs/stats.hpp"

#include <algorithm>
#include <sstream>

namespace aogibbs {

namespace {

Point uniform_in(const Window& w, Rng& rng) {
  Point x = w.lower();
  for (int i = 0; i < w.dim(); ++i) x[i] += w.side() * uniform01(rng);
  // Rounding can land exactly on the open upper face.
  return w.contains(x) ? x : w.wrap(x);
}

/// Smallest n with the window inside Lambda_n.
long covering_level(const Window& w) {
  long n = 1;
  for (int i = 0; i < w.dim(); ++i) {
    n = std::max(n, static_cast<long>(std::ceil(std::max(2.0 * w.upper()[i], -2.0 * w.lower()[i]))));
  }
  return n;
}

double sum_radius_power(const Configuration& c, const Window& w) {
  double s = 0.0;
  for (const auto& p : c) {
    if (w.contains(p.x)) s += std::pow(p.radius, c.dim());
  }
  return s;
}

}  // namespace

Configuration sample_poisson(const ModelParams& params, const Window& window, Rng& rng) {
  params.validate();
  if (window.dim() != params.dim) throw std::invalid_argument("sample_poisson: window dimension mismatch");
  std::poisson_distribution<long> count_law(params.z * window.volume());
  const long n = count_law(rng);
  Configuration c(params.dim);
  c.set_index_hint(params.r, window.side() / 64.0);
  while (static_cast<long>(c.size()) < n) {
    const Point x = uniform_in(window, rng);
    c.insert({x, params.marks.sample(rng)});
  }
  return c;
}

Configuration sample_poisson(const ModelParams& params, const Window& window, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return sample_poisson(params, window, rng);
}

void MoveMix::validate() const {
  for (double p : {birth, death, translate, resize}) {
    if (!(p >= 0.0)) throw std::invalid_argument("move mix: probabilities must be >= 0");
  }
  if (std::abs(birth + death + translate + resize - 1.0) > 1e-9) {
    throw std::invalid_argument("move mix: probabilities must sum to 1");
  }
  if (birth != death) throw std::invalid_argument("move mix: birth and death probabilities must be equal");
  if (birth == 0.0) throw std::invalid_argument("move mix: birth/death moves are required");
}

void SamplerOptions::validate() const {
  mix.validate();
  if (burn_in < 0 || thin < 1) throw std::invalid_argument("sampler: burn_in >= 0 and thin >= 1 required");
  if (!(translate_step > 0.0)) throw std::invalid_argument("sampler: translate_step must be > 0");
  if (audit_every < 0) throw std::invalid_argument("sampler: audit_every must be >= 0");
  quad.validate();
}

GibbsSampler::GibbsSampler(ModelParams params, const Window& window, BoundaryCondition bc, SamplerOptions options,
                           std::uint64_t seed, std::optional<Configuration> initial)
    : params_(std::move(params)),
      ham_(window, std::move(bc), params_.r, options.quad),
      options_(std::move(options)),
      rng_(make_rng(seed)),
      state_{Configuration(window.dim()), {}, 0, seed, {}, 0.0, 0.0} {
  params_.validate();
  options_.validate();
  if (window.dim() != params_.dim) throw std::invalid_argument("sampler: window dimension mismatch");
  validate_boundary();
  if (initial) {
    if (initial->dim() != params_.dim) throw std::invalid_argument("sampler: initial configuration dimension");
    for (const auto& p : *initial) {
      if (!ham_.window().contains(p.x)) throw std::invalid_argument("sampler: initial point outside the window");
    }
    state_.config = std::move(*initial);
  }
  state_.config.set_index_hint(params_.r, ham_.window().side() / 64.0);
  sweep_length_ = std::max(1L, std::lround(params_.z * ham_.window().volume()));
  state_.energy = ham_.conditional_energy(state_.config, rng_);
  if (!state_.energy.finite) throw std::invalid_argument("sampler: initial configuration violates the hardcore");
}

void GibbsSampler::validate_boundary() const {
  const auto& bc = ham_.bc();
  if (bc.kind == BoundaryCondition::Kind::Periodic) {
    if (2.0 * (params_.marks.max_radius() + params_.r) > ham_.window().side()) {
      throw std::invalid_argument("sampler: periodic window narrower than the largest enlarged ball");
    }
  }
  if (bc.kind == BoundaryCondition::Kind::Fixed) {
    const auto env = TemperednessEnvelope::for_params(params_, options_.gamma);
    const long K = covering_level(ham_.window());
    if (auto bad = first_untempered(ham_.boundary(), K, env)) {
      const auto& p = ham_.boundary()[*bad];
      const long m = std::max(K, shell_index(p.x));
      std::ostringstream msg;
      msg << "boundary configuration is not tempered: radius " << p.radius << " at level " << m << " exceeds g("
          << m << ") = " << env.g(static_cast<double>(m));
      throw std::invalid_argument(msg.str());
    }
  }
}

bool GibbsSampler::accept(double log_ratio) {
  if (log_ratio >= 0.0) return true;
  return std::log(uniform01(rng_)) < log_ratio;
}

void GibbsSampler::add_energy(const Estimate& delta) {
  state_.energy.area += delta.value;
  state_.energy_budget_var += delta.std_error * delta.std_error;
  state_.energy.std_error = std::sqrt(state_.energy_budget_var);
}

bool GibbsSampler::propose_birth() {
  const MarkedPoint p{uniform_in(ham_.window(), rng_), params_.marks.sample(rng_)};
  const EnergyValue delta = ham_.delta_insert(state_.config, p, rng_);
  if (!delta.finite) return false;
  const double N = static_cast<double>(state_.config.size());
  const double log_ratio = std::log(params_.z * ham_.window().volume() / (N + 1.0)) - params_.beta * delta.area;
  if (!accept(log_ratio)) return false;
  if (!state_.config.insert(p)) return false;
  add_energy({delta.area, delta.std_error, 1});
  return true;
}

bool GibbsSampler::propose_death() {
  const std::size_t n = state_.config.size();
  if (n == 0) return false;
  const auto i = std::min(n - 1, static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(n)));
  const Estimate delta = ham_.delta_delete(state_.config, i, rng_);
  const double log_ratio =
      std::log(static_cast<double>(n) / (params_.z * ham_.window().volume())) - params_.beta * delta.value;
  if (!accept(log_ratio)) return false;
  state_.config.erase(i);
  add_energy(delta);
  return true;
}

bool GibbsSampler::propose_translate() {
  const std::size_t n = state_.config.size();
  if (n == 0) return false;
  const auto i = std::min(n - 1, static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(n)));
  MarkedPoint p = state_.config[i];
  for (int k = 0; k < params_.dim; ++k) p.x[k] += options_.translate_step * (2.0 * uniform01(rng_) - 1.0);
  if (ham_.bc().kind == BoundaryCondition::Kind::Periodic) {
    p.x = ham_.window().wrap(p.x);
  } else if (!ham_.window().contains(p.x)) {
    return false;
  }
  if (state_.config.contains_position(p.x)) return false;
  const auto delta = ham_.delta_replace(state_.config, i, p, rng_);
  if (!delta || !accept(-params_.beta * delta->value)) return false;
  state_.config.replace(i, p);
  add_energy(*delta);
  return true;
}

bool GibbsSampler::propose_resize() {
  const std::size_t n = state_.config.size();
  if (n == 0) return false;
  const auto i = std::min(n - 1, static_cast<std::size_t>(uniform01(rng_) * static_cast<double>(n)));
  MarkedPoint p = state_.config[i];
  p.radius = params_.marks.sample(rng_);
  const auto delta = ham_.delta_replace(state_.config, i, p, rng_);
  if (!delta || !accept(-params_.beta * delta->value)) return false;
  state_.config.replace(i, p);
  add_energy(*delta);
  return true;
}

bool GibbsSampler::step() {
  const MoveMix& mix = options_.mix;
  const double u = uniform01(rng_);
  MoveKind kind = MoveKind::Resize;
  if (u < mix.birth) {
    kind = MoveKind::Birth;
  } else if (u < mix.birth + mix.death) {
    kind = MoveKind::Death;
  } else if (u < mix.birth + mix.death + mix.translate) {
    kind = MoveKind::Translate;
  }
  bool ok = false;
  switch (kind) {
    case MoveKind::Birth:
      ok = propose_birth();
      break;
    case MoveKind::Death:
      ok = propose_death();
      break;
    case MoveKind::Translate:
      ok = propose_translate();
      break;
    case MoveKind::Resize:
      ok = propose_resize();
      break;
  }
  const auto k = static_cast<std::size_t>(kind);
  ++state_.stats.proposed[k];
  if (ok) ++state_.stats.accepted[k];
  return ok;
}

void GibbsSampler::sweep() {
  for (long i = 0; i < sweep_length_; ++i) step();
  ++state_.sweep_count;
  if (options_.audit_every > 0 && ++since_audit_ >= options_.audit_every) audit();
}

void GibbsSampler::sweeps(long n) {
  for (long i = 0; i < n; ++i) sweep();
}

double GibbsSampler::audit() {
  since_audit_ = 0;
  const EnergyValue fresh = ham_.conditional_energy(state_.config, rng_);
  if (!fresh.finite) throw std::logic_error("sampler reached a hardcore-violating state");
  const double gap = std::abs(fresh.area - state_.energy.area);
  const double allowed = 6.0 * std::sqrt(state_.energy_budget_var + fresh.std_error * fresh.std_error) +
                         1e-8 * (1.0 + std::abs(fresh.area));
  if (gap > allowed) {
    std::ostringstream msg;
    msg << "cached energy drifted: cached " << state_.energy.area << ", recomputed " << fresh.area;
    throw std::logic_error(msg.str());
  }
  state_.max_audit_gap = std::max(state_.max_audit_gap, gap);
  state_.energy = fresh;
  state_.energy_budget_var = fresh.std_error * fresh.std_error;
  return gap;
}

void GibbsSampler::run(long n_snapshots, const std::function<void(const ChainState&)>& on_snapshot) {
  if (!burned_in_) {
    double occupancy = 0.0;
    for (long i = 0; i < options_.burn_in; ++i) {
      sweep();
      occupancy += static_cast<double>(std::max<std::size_t>(state_.config.size(), 1));
    }
    if (options_.burn_in > 0) sweep_length_ = std::max(1L, std::lround(occupancy / options_.burn_in));
    burned_in_ = true;
  }
  for (long k = 0; k < n_snapshots; ++k) {
    sweeps(options_.thin);
    on_snapshot(state_);
  }
}

std::vector<ChainState> GibbsSampler::run(long n_snapshots) {
  std::vector<ChainState> out;
  out.reserve(static_cast<std::size_t>(std::max(n_snapshots, 0L)));
  run(n_snapshots, [&](const ChainState& s) { out.push_back(s); });
  return out;
}

std::vector<ChainState> gibbs_mcmc(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                                   const SamplerOptions& options, long n_snapshots, std::uint64_t seed) {
  GibbsSampler chain(params, window, bc, options, seed);
  return chain.run(n_snapshots);
}

double comparison_z(const Estimate& a, const Estimate& b) {
  const double se = std::hypot(a.std_error, b.std_error);
  const double diff = a.value - b.value;
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

double DlrReport::max_abs_z() const {
  double m = 0.0;
  for (const auto& r : rows) m = std::max(m, std::abs(r.z));
  return m;
}

namespace {

/// Everything that acts as boundary for the inner window: the rest of omega, the outer
/// boundary beyond Lambda, or the periodic translates.
Configuration inner_boundary(const Configuration& omega, const Window& outer, const Window& inner,
                             const BoundaryCondition& bc, double reach) {
  Configuration out(omega.dim());
  if (bc.kind == BoundaryCondition::Kind::Periodic) {
    for (const auto& p : PeriodicView(omega, outer).materialize(reach)) {
      if (!inner.contains(p.x)) out.insert(p);
    }
    return out;
  }
  for (const auto& p : omega) {
    if (!inner.contains(p.x)) out.insert(p);
  }
  if (bc.kind == BoundaryCondition::Kind::Fixed) {
    for (const auto& p : *bc.outer) {
      if (!outer.contains(p.x)) out.insert(p);
    }
  }
  return out;
}

}  // namespace

DlrReport dlr_consistency_check(const ModelParams& params, const Window& outer, const Window& inner,
                                const BoundaryCondition& bc, const SamplerOptions& options, long n_samples,
                                long inner_sweeps, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("dlr check: need at least 2 samples");
  for (int i = 0; i < outer.dim(); ++i) {
    if (inner.lower()[i] < outer.lower()[i] || inner.upper()[i] > outer.upper()[i]) {
      throw std::invalid_argument("dlr check: inner window must lie inside the outer window");
    }
  }
  const double reach = 2.0 * (params.marks.max_radius() + params.r);
  const Window delta = inner.with_torus(false);

  std::vector<double> n_a, s_a, e_a, n_b, s_b, e_b;
  {
    GibbsSampler chain(params, outer, bc, options, split_seed(seed, 1));
    chain.run(n_samples, [&](const ChainState& st) {
      const Configuration bdry = inner_boundary(st.config, outer, delta, bc, reach);
      const Configuration mine = restrict(st.config, delta);
      Rng rng = make_rng(seed, 7);
      const Hamiltonian h(delta, BoundaryCondition::fixed(bdry), params.r, options.quad);
      n_a.push_back(static_cast<double>(mine.size()));
      s_a.push_back(sum_radius_power(mine, delta));
      e_a.push_back(h.area_energy(mine, rng).value);
    });
  }
  {
    GibbsSampler chain(params, outer, bc, options, split_seed(seed, 2));
    SamplerOptions inner_opts = options;
    inner_opts.burn_in = 0;
    long k = 0;
    chain.run(n_samples, [&](const ChainState& st) {
      const Configuration bdry = inner_boundary(st.config, outer, delta, bc, reach);
      GibbsSampler local(params, delta, BoundaryCondition::fixed(bdry), inner_opts, split_seed(seed, 1000 + k++));
      local.sweeps(inner_sweeps);
      const auto& mine = local.state().config;
      n_b.push_back(static_cast<double>(mine.size()));
      s_b.push_back(sum_radius_power(mine, delta));
      e_b.push_back(local.state().energy.area);
    });
  }
  DlrReport report;
  auto add = [&](std::string name, const std::vector<double>& a, const std::vector<double>& b) {
    const Estimate ea = batch_mean(a), eb = batch_mean(b);
    report.rows.push_back({std::move(name), ea, eb, comparison_z(ea, eb)});
  };
  add("mean_N_delta", n_a, n_b);
  add("mean_sum_R^d", s_a, s_b);
  add("mean_energy_delta", e_a, e_b);
  return report;
}

std::vector<FkgRow> fkg_temperedness_check(const ModelParams& params, const Window& window,
                                           const BoundaryCondition& bc, const std::vector<long>& K_grid,
                                           const SamplerOptions& options, long n_samples, std::uint64_t seed,
                                           std::optional<double> gamma) {
  if (n_samples < 2) throw std::invalid_argument("fkg check: need at least 2 samples");
  const auto env = TemperednessEnvelope::for_params(params, gamma);
  for (long K : K_grid) {
    if (K < 1) throw std::invalid_argument("fkg check: levels must be >= 1");
  }
  std::vector<std::vector<double>> gibbs(K_grid.size()), poisson(K_grid.size());

  SamplerOptions opts = options;
  opts.gamma = gamma;
  GibbsSampler chain(params, window, bc, opts, split_seed(seed, 1));
  const Window plain = window.with_torus(false);
  chain.run(n_samples, [&](const ChainState& st) {
    const Configuration inside = restrict(st.config, plain);
    for (std::size_t k = 0; k < K_grid.size(); ++k) {
      gibbs[k].push_back(in_tempered_set(inside, K_grid[k], env) ? 1.0 : 0.0);
    }
  });

  // Beyond the saturation level the envelope cannot bind, so sampling that box is exact.
  long M = std::max(envelope_saturation_level(params.marks, env), covering_level(window));
  for (long K : K_grid) M = std::max(M, K);
  const Window box = Window::centered(params.dim, static_cast<double>(M));
  Rng rng = make_rng(seed, 2);
  for (long s = 0; s < n_samples; ++s) {
    const Configuration omega = sample_poisson(params, box, rng);
    for (std::size_t k = 0; k < K_grid.size(); ++k) {
      poisson[k].push_back(in_tempered_set(omega, K_grid[k], env) ? 1.0 : 0.0);
    }
  }

  std::vector<FkgRow> rows;
  for (std::size_t k = 0; k < K_grid.size(); ++k) {
    const Estimate g = batch_mean(gibbs[k]);
    const Estimate p = mean_estimate(poisson[k]);
    const double analytic = poisson_tempered_probability(params, env, K_grid[k], M);
    rows.push_back({K_grid[k], g, p, analytic, g.value >= p.value - 3.0 * std::hypot(g.std_error, p.std_error)});
  }
  return rows;
}

}  // namespace aogibbs
