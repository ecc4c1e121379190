#include "aogibbs/estimators.hpp"

#include "aogibbs/stats.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <functional>
#include <limits>
#include <sstream>

namespace aogibbs {

std::string method_name(PressureMethod m) {
  switch (m) {
    case PressureMethod::Direct:
      return "direct";
    case PressureMethod::ThermoIntegration:
      return "thermo_integration";
    case PressureMethod::ActivityIntegration:
      return "activity_integration";
  }
  return "unknown";
}

namespace {

long zero_truncated_poisson(double lambda, Rng& rng) {
  if (lambda > 3.0) {
    std::poisson_distribution<long> law(lambda);
    for (;;) {
      const long n = law(rng);
      if (n >= 1) return n;
    }
  }
  const double u = uniform01(rng);
  long k = 1;
  double p = lambda / std::expm1(lambda);
  double cdf = p;
  while (u > cdf && k < 10000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

Point uniform_point(const Window& w, Rng& rng) {
  Point x = w.lower();
  for (int i = 0; i < w.dim(); ++i) x[i] += w.side() * uniform01(rng);
  return w.contains(x) ? x : w.wrap(x);
}

/// Pools per-chain estimates: mean of the chain means with independent errors.
Estimate pool(const std::vector<Estimate>& per_chain) {
  if (per_chain.empty()) throw std::invalid_argument("pool: no chains");
  double v = 0.0, var = 0.0;
  std::size_t n = 0;
  for (const auto& e : per_chain) {
    v += e.value;
    var += e.std_error * e.std_error;
    n += e.n_samples;
  }
  const double c = static_cast<double>(per_chain.size());
  return {v / c, std::sqrt(var) / c, n};
}

Window window_for(const Window& w, const BoundaryCondition& bc) {
  return w.with_torus(bc.kind == BoundaryCondition::Kind::Periodic);
}

}  // namespace

PressureEstimate partition_direct(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                                  long n_samples, std::uint64_t seed, const QuadratureSpec& quad) {
  params.validate();
  if (n_samples < 2) throw std::invalid_argument("partition_direct: need at least 2 samples");
  const Window w = window_for(window, bc);
  const double vol = w.volume();
  const double lambda = params.z * vol;
  PressureEstimate out;
  out.n = w.side();
  out.bc = bc.kind;
  out.method = PressureMethod::Direct;
  if (lambda > 50.0) {
    std::ostringstream msg;
    msg << "z|Lambda| = " << lambda << " > 50: direct estimate of Z has large relative variance";
    out.warnings.push_back(msg.str());
  }
  const Hamiltonian ham(w, bc, params.r, quad);
  Rng rng = make_rng(seed);
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(n_samples));
  for (long s = 0; s < n_samples; ++s) {
    const long n = zero_truncated_poisson(lambda, rng);
    Configuration c(params.dim);
    c.set_index_hint(params.r, w.side() / 64.0);
    while (static_cast<long>(c.size()) < n) c.insert({uniform_point(w, rng), params.marks.sample(rng)});
    weights.push_back(ham.conditional_energy(c, rng).boltzmann(params.beta));
  }
  const Estimate m = mean_estimate(weights);
  const double nonempty = -std::expm1(-lambda);
  if (m.value <= 0.0) {
    out.lower_bound_only = true;
    out.log_z_per_volume = {-params.z, 0.0, m.n_samples};
    out.warnings.push_back("no draw contributed: reporting the lower bound log Z >= -z|Lambda|");
    return out;
  }
  const double Z = std::exp(-lambda) + nonempty * m.value;
  const double se = nonempty * m.std_error;
  out.log_z_per_volume = {std::log(Z) / vol, se / Z / vol, m.n_samples};
  return out;
}

Estimate mean_chain_energy(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                           const SamplerOptions& options, int chains, long snapshots, std::uint64_t seed,
                           int threads) {
  if (chains < 1 || snapshots < 2) throw std::invalid_argument("mean_chain_energy: need chains >= 1, snapshots >= 2");
  std::vector<Estimate> per(static_cast<std::size_t>(chains));
  parallel_for(per.size(), threads, [&](std::size_t c) {
    GibbsSampler chain(params, window, bc, options, split_seed(seed, c));
    std::vector<double> e;
    chain.run(snapshots, [&](const ChainState& s) { e.push_back(s.energy.area); });
    per[c] = batch_mean(e);
  });
  return pool(per);
}

std::vector<double> default_beta_grid(double beta, int points, double beta_0) {
  if (points < 1) throw std::invalid_argument("beta grid: need at least one point");
  if (!(beta_0 > 0.0) || !(beta >= beta_0)) throw std::invalid_argument("beta grid: need 0 < beta_0 <= beta");
  if (points == 1) return {beta_0};
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[i] = beta_0 + (beta - beta_0) * i / (points - 1.0);
  return g;
}

PressureEstimate pressure_thermo_integration(const ModelParams& params, const Window& window,
                                             const BoundaryCondition& bc, const std::vector<double>& beta_grid,
                                             int chains, long snapshots, const SamplerOptions& options,
                                             std::uint64_t seed, long direct_samples, int threads) {
  if (beta_grid.empty()) throw std::invalid_argument("thermo integration: empty beta grid");
  if (!(beta_grid.front() > 0.0)) throw std::invalid_argument("thermo integration: beta_0 must be > 0");
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > beta_grid[i - 1])) {
      throw std::invalid_argument("thermo integration: beta grid must be strictly ascending");
    }
  }
  const Window w = window_for(window, bc);
  const double vol = w.volume();
  PressureEstimate start = partition_direct(params.with_beta(beta_grid.front()), w, bc, direct_samples,
                                            split_seed(seed, 0), options.quad);
  PressureEstimate out = start;
  out.method = PressureMethod::ThermoIntegration;
  if (beta_grid.size() == 1) return out;

  const std::size_t K = beta_grid.size();
  double log_z = start.log_z_per_volume.value * vol;
  double var = std::pow(start.log_z_per_volume.std_error * vol, 2);
  std::size_t used = start.log_z_per_volume.n_samples;
  for (std::size_t j = 0; j < K; ++j) {
    const double left = j > 0 ? beta_grid[j] - beta_grid[j - 1] : 0.0;
    const double right = j + 1 < K ? beta_grid[j + 1] - beta_grid[j] : 0.0;
    const double c = 0.5 * (left + right);
    const Estimate e = mean_chain_energy(params.with_beta(beta_grid[j]), w, bc, options, chains, snapshots,
                                         split_seed(seed, 1 + j), threads);
    log_z -= c * e.value;
    var += c * c * e.std_error * e.std_error;
    used += e.n_samples;
  }
  out.log_z_per_volume = {log_z / vol, std::sqrt(var) / vol, used};
  out.lower_bound_only = false;
  return out;
}

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int nodes) {
  auto expand = [](const auto& x, const auto& wt) {
    std::vector<double> xs, ws;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        xs.push_back(0.0);
        ws.push_back(wt[i]);
      } else {
        xs.push_back(-x[i]);
        ws.push_back(wt[i]);
        xs.push_back(x[i]);
        ws.push_back(wt[i]);
      }
    }
    return std::pair{xs, ws};
  };
  using boost::math::quadrature::gauss;
  switch (nodes) {
    case 7:
      return expand(gauss<double, 7>::abscissa(), gauss<double, 7>::weights());
    case 10:
      return expand(gauss<double, 10>::abscissa(), gauss<double, 10>::weights());
    case 15:
      return expand(gauss<double, 15>::abscissa(), gauss<double, 15>::weights());
    case 20:
      return expand(gauss<double, 20>::abscissa(), gauss<double, 20>::weights());
    default:
      throw std::invalid_argument("gauss_legendre: nodes must be 7, 10, 15 or 20");
  }
}

PressureEstimate pressure_activity_integration(const ModelParams& params, const Window& window,
                                               const BoundaryCondition& bc, int nodes, int chains, long snapshots,
                                               const SamplerOptions& options, std::uint64_t seed, int threads) {
  params.validate();
  if (chains < 1 || snapshots < 2) throw std::invalid_argument("activity integration: chains >= 1, snapshots >= 2");
  const auto [t, wt] = gauss_legendre(nodes);
  const Window w = window_for(window, bc);
  const double vol = w.volume();
  const std::size_t m = t.size();
  std::vector<Estimate> density(m);
  // Flattened (node, chain) jobs so that threads are used across nodes too.
  std::vector<Estimate> per(m * static_cast<std::size_t>(chains));
  parallel_for(per.size(), threads, [&](std::size_t job) {
    const std::size_t i = job / static_cast<std::size_t>(chains);
    const std::size_t c = job % static_cast<std::size_t>(chains);
    const double zi = 0.5 * params.z * (1.0 + t[i]);
    GibbsSampler chain(params.with_z(zi), w, bc, options, split_seed(split_seed(seed, 100 + i), c));
    std::vector<double> f;
    chain.run(snapshots, [&](const ChainState& s) { f.push_back(static_cast<double>(s.config.size()) / (zi * vol)); });
    per[job] = batch_mean(f);
  });
  double acc = 0.0, var = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const Estimate fi = pool({per.begin() + i * chains, per.begin() + (i + 1) * chains});
    acc += wt[i] * fi.value;
    var += wt[i] * wt[i] * fi.std_error * fi.std_error;
    used += fi.n_samples;
  }
  PressureEstimate out;
  out.n = w.side();
  out.bc = bc.kind;
  out.method = PressureMethod::ActivityIntegration;
  out.log_z_per_volume = {-params.z + 0.5 * params.z * acc, 0.5 * params.z * std::sqrt(var), used};
  return out;
}

Configuration periodic_boundary_snapshot(const ModelParams& params, long n, const SamplerOptions& options,
                                         long sweeps, std::uint64_t seed) {
  const long pad = static_cast<long>(std::ceil(2.0 * (params.marks.max_radius() + params.r))) + 1;
  const Window torus = Window::centered(params.dim, static_cast<double>(n + 2 * pad), true);
  GibbsSampler chain(params, torus, BoundaryCondition::periodic(), options, seed);
  chain.sweeps(options.burn_in + sweeps);
  return chain.state().config;
}

BcComparison pressure_bc_comparison(const ModelParams& params, const std::vector<long>& n_list,
                                    const PressureRunOptions& run, std::uint64_t seed, int threads) {
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1 || (i > 0 && n_list[i] <= n_list[i - 1])) {
      throw std::invalid_argument("pressure comparison: n_list must be ascending positive");
    }
  }
  auto estimate = [&](const Window& w, const BoundaryCondition& bc, std::uint64_t s) {
    switch (run.method) {
      case PressureMethod::Direct:
        return partition_direct(params, w, bc, run.direct_samples, s, run.sampler.quad);
      case PressureMethod::ThermoIntegration:
        return pressure_thermo_integration(params, w, bc, default_beta_grid(params.beta, run.beta_points), run.chains,
                                           run.snapshots, run.sampler, s, run.direct_samples, threads);
      case PressureMethod::ActivityIntegration:
        break;
    }
    return pressure_activity_integration(params, w, bc, run.nodes, run.chains, run.snapshots, run.sampler, s, threads);
  };
  BcComparison out;
  for (long n : n_list) {
    const Window w = Window::centered(params.dim, static_cast<double>(n));
    const std::uint64_t base = split_seed(seed, static_cast<std::uint64_t>(n));
    const auto per = estimate(w, BoundaryCondition::periodic(), split_seed(base, 1));
    const auto free = estimate(w, BoundaryCondition::free_bc(), split_seed(base, 2));
    const Configuration zeta = periodic_boundary_snapshot(params, n, run.sampler, run.zeta_sweeps, split_seed(base, 3));
    const auto fixed = estimate(w, BoundaryCondition::fixed(zeta), split_seed(base, 4));
    out.rows.push_back({n, per});
    out.rows.push_back({n, free});
    out.rows.push_back({n, fixed});
    out.gaps.push_back({n, "periodic-free", per.log_z_per_volume - free.log_z_per_volume});
    out.gaps.push_back({n, "fixed-free", fixed.log_z_per_volume - free.log_z_per_volume});
  }
  return out;
}

PalmCheck palm_energy_identity_check(const Configuration& config, const Window& window, const ModelParams& params,
                                     const QuadratureSpec& quad, std::uint64_t seed, double z_tolerance) {
  const Window torus = window.with_torus(true);
  const Hamiltonian ham(torus, BoundaryCondition::periodic(), params.r, quad);
  if (ham.hardcore_violated(config)) throw std::invalid_argument("palm check: configuration overlaps on the torus");
  Rng rng = make_rng(seed);
  PalmCheck out;
  out.periodic_energy = ham.area_energy(config, rng);
  out.palm_sum = Estimate::exact(0.0);
  const Metric metric = Metric::torus(torus);
  for (std::size_t i = 0; i < config.size(); ++i) {
    out.palm_sum = out.palm_sum + xwise_palm_summand(config, i, params.r, quad, rng, metric);
  }
  const double diff = out.periodic_energy.value - out.palm_sum.value;
  const double se = std::hypot(out.periodic_energy.std_error, out.palm_sum.std_error);
  // Rounding slack for the exact routes, where both errors are zero.
  const double slack = 1e-9 * (1.0 + std::abs(out.periodic_energy.value));
  out.pass = std::abs(diff) <= z_tolerance * se + slack;
  out.z = se == 0.0 && std::abs(diff) <= slack ? 0.0 : comparison_z(out.periodic_energy, out.palm_sum);
  return out;
}

double box_overlap_fraction(double n, const std::vector<Point>& ys) {
  if (ys.empty()) return 1.0;
  const int d = static_cast<int>(ys.front().size());
  double f = 1.0;
  for (int k = 0; k < d; ++k) {
    double hi = 0.0, lo = 0.0;
    for (const auto& y : ys) {
      hi = std::max(hi, y[k]);
      lo = std::min(lo, y[k]);
    }
    f *= std::max(0.0, n - (hi - lo)) / n;
  }
  return f;
}

Estimate palm_fhn_summand(const Configuration& config, std::size_t i, double r, double n,
                          const QuadratureSpec& quad, Rng& rng, const Metric& metric) {
  if (i >= config.size()) throw std::out_of_range("palm_fhn_summand: no such point");
  const int d = config.dim();
  const Ball o{config[i].x, config[i].radius + r};
  if (metric.is_torus() && 2.0 * o.radius > metric.window().side()) {
    throw std::invalid_argument("palm_fhn_summand: enlarged ball wider than the torus");
  }
  std::vector<Ball> nb;
  for (std::size_t j = 0; j < config.size(); ++j) {
    if (j == i) continue;
    for (auto& b : metric.images_meeting({config[j].x, config[j].radius + r}, o)) nb.push_back(std::move(b));
  }
  if (nb.size() > 24) throw std::invalid_argument("palm_fhn_summand: too many overlapping neighbours");
  const std::size_t m = nb.size();
  std::vector<std::vector<bool>> meets(m, std::vector<bool>(m, false));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      meets[a][b] = meets[b][a] = (nb[a].center - nb[b].center).norm() < nb[a].radius + nb[b].radius;
    }
  }
  const bool exact = d <= 2 && quad.exact_when_available;
  double value = ball_volume(d, o.radius);
  double var = 0.0;
  std::size_t samples = 1;
  std::vector<std::size_t> members;
  std::vector<Ball> balls{o};
  std::function<void(std::size_t)> grow = [&](std::size_t from) {
    for (std::size_t j = from; j < m; ++j) {
      bool ok = true;
      for (std::size_t q : members) ok = ok && meets[q][j];
      if (!ok) continue;
      members.push_back(j);
      balls.push_back(nb[j]);
      const int k = static_cast<int>(balls.size());
      Estimate vol;
      if (k == 2) {
        vol = Estimate::exact(pair_intersection_volume(d, o, nb[j]));
      } else if (exact) {
        vol = Estimate::exact(k_intersection_volume_exact(d, balls));
      } else {
        vol = k_intersection_volume(d, balls, quad, rng);
      }
      // An empty intersection stays empty for every superset.
      if (vol.value > 0.0 || vol.std_error > 0.0) {
        std::vector<Point> ys;
        for (std::size_t q : members) ys.push_back(nb[q].center - o.center);
        const double c = (k % 2 == 0 ? -1.0 : 1.0) / k * box_overlap_fraction(n, ys);
        value += c * vol.value;
        var += c * c * vol.std_error * vol.std_error;
        samples = std::max(samples, vol.n_samples);
        grow(j + 1);
      }
      members.pop_back();
      balls.pop_back();
    }
  };
  grow(0);
  return {value, std::sqrt(var), samples};
}

std::vector<EnergyDensityRow> energy_density_curve(const ModelParams& params, const BoundaryCondition& bc,
                                                   const std::vector<long>& n_list, int chains, long snapshots,
                                                   const SamplerOptions& options, std::uint64_t seed, int threads) {
  if (n_list.empty()) throw std::invalid_argument("energy density: empty n_list");
  if (chains < 1 || snapshots < 2) throw std::invalid_argument("energy density: chains >= 1, snapshots >= 2");
  const long L = *std::max_element(n_list.begin(), n_list.end());
  const bool periodic = bc.kind == BoundaryCondition::Kind::Periodic;
  const Window big = Window::centered(params.dim, static_cast<double>(L), periodic);
  const Metric metric = periodic ? Metric::torus(big) : Metric();
  const std::size_t K = n_list.size();
  std::vector<std::vector<Estimate>> direct(K, std::vector<Estimate>(static_cast<std::size_t>(chains)));
  std::vector<std::vector<Estimate>> palm = direct;
  parallel_for(static_cast<std::size_t>(chains), threads, [&](std::size_t c) {
    GibbsSampler chain(params, big, bc, options, split_seed(seed, c));
    Rng rng = make_rng(seed, 1000 + c);
    std::vector<std::vector<double>> dv(K), pv(K);
    chain.run(snapshots, [&](const ChainState& s) {
      for (std::size_t k = 0; k < K; ++k) {
        const double n = static_cast<double>(n_list[k]);
        const Window box = Window::centered(params.dim, n);
        const Configuration inside = restrict(s.config, box);
        dv[k].push_back(area_energy(inside, box, BoundaryCondition::free_bc(), params.r, options.quad, rng).value /
                        box.volume());
        double acc = 0.0;
        for (std::size_t i = 0; i < s.config.size(); ++i) {
          acc += palm_fhn_summand(s.config, i, params.r, n, options.quad, rng, metric).value;
        }
        pv[k].push_back(acc / big.volume());
      }
    });
    for (std::size_t k = 0; k < K; ++k) {
      direct[k][c] = batch_mean(dv[k]);
      palm[k][c] = batch_mean(pv[k]);
    }
  });
  std::vector<EnergyDensityRow> rows;
  for (std::size_t k = 0; k < K; ++k) {
    EnergyDensityRow row;
    row.n = n_list[k];
    row.direct = pool(direct[k]);
    row.palm = pool(palm[k]);
    row.z = comparison_z(row.direct, row.palm);
    row.snapshots = row.direct.n_samples;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TailRow> temperedness_tail_stats(const ModelParams& params, const std::vector<long>& N_list,
                                             long n_samples, std::uint64_t seed, std::optional<double> gamma,
                                             std::optional<long> M) {
  params.validate();
  if (n_samples < 2) throw std::invalid_argument("tail stats: need at least 2 samples");
  const auto env = TemperednessEnvelope::for_params(params, gamma);
  const long saturation = envelope_saturation_level(params.marks, env);
  std::vector<TailRow> rows;
  for (std::size_t idx = 0; idx < N_list.size(); ++idx) {
    const long N = N_list[idx];
    if (N < 1) throw std::invalid_argument("tail stats: levels must be >= 1");
    const long top = M ? *M : std::max(N, saturation);
    if (top < N) throw std::invalid_argument("tail stats: need M >= N");
    const Window box = Window::centered(params.dim, static_cast<double>(top));
    Rng rng = make_rng(seed, idx);
    std::vector<double> hits;
    hits.reserve(static_cast<std::size_t>(n_samples));
    for (long s = 0; s < n_samples; ++s) {
      hits.push_back(in_tempered_set(sample_poisson(params, box, rng), N, env, top) ? 0.0 : 1.0);
    }
    TailRow row;
    row.N = N;
    row.M = top;
    row.empirical = mean_estimate(hits);
    row.analytic = 1.0 - poisson_tempered_probability(params, env, N, top);
    row.reference = std::exp(-std::pow(static_cast<double>(N), params.dim * (1.0 + env.gamma)));
    row.pass = row.empirical.value <= row.analytic + 3.0 * row.empirical.std_error;
    rows.push_back(row);
  }
  return rows;
}

double poisson_relative_entropy(double z_p, double z_q, double volume) {
  if (!(z_p > 0.0) || !(z_q > 0.0)) throw std::invalid_argument("relative entropy: activities must be > 0");
  if (!(volume >= 0.0)) throw std::invalid_argument("relative entropy: volume must be >= 0");
  return volume * (z_q - z_p + z_p * std::log(z_p / z_q));
}

Configuration good_lattice(int dim, double S, double n, double gap) {
  check_dim(dim);
  const double a = 2.0 * S * (1.0 + gap);
  const Window w = Window::centered(dim, n);
  const long lo = static_cast<long>(std::floor(-0.5 * n / a)) - 1;
  const long hi = static_cast<long>(std::ceil(0.5 * n / a)) + 1;
  Configuration c(dim);
  for_each_offset(dim, static_cast<int>(std::max(-lo, hi)), [&](const Point& k) {
    const Point x = a * k;
    if (w.contains(x)) c.insert({x, S});
  });
  return c;
}

std::vector<DiscontinuityRow> discontinuity_demo(int dim, double S, double r, const std::vector<long>& n_list,
                                                 const QuadratureSpec& quad, double gap, std::uint64_t seed) {
  if (!(S > 0.0) || !(r > 0.0)) throw std::invalid_argument("discontinuity demo: S and r must be > 0");
  Rng rng = make_rng(seed);
  std::vector<DiscontinuityRow> rows;
  for (long n : n_list) {
    if (n < 1) throw std::invalid_argument("discontinuity demo: n must be >= 1");
    DiscontinuityRow row;
    row.n = n;
    const Window w = Window::centered(dim, static_cast<double>(n));
    const Hamiltonian ham(w, BoundaryCondition::free_bc(), r, quad);
    const Configuration good = good_lattice(dim, S, static_cast<double>(n), gap);
    row.good_hardcore = ham.hardcore_violated(good);
    row.good_energy_density = ham.area_energy(good, rng).value / w.volume();

    const double spacing = 2.0 * static_cast<double>(n);
    const Window wide = Window::centered(dim, 4.0 * static_cast<double>(n));
    Configuration bad(dim);
    for_each_offset(dim, 2, [&](const Point& k) {
      const Point x = spacing * k;
      if (wide.contains(x)) bad.insert({x, spacing});
    });
    row.bad_hardcore = hardcore_violated(bad, wide, BoundaryCondition::free_bc());
    row.mixture_energy = row.bad_hardcore ? std::numeric_limits<double>::infinity()
                                          : (1.0 - 1.0 / n) * row.good_energy_density;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace aogibbs
