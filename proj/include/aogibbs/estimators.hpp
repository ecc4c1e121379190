#pragma once

#include "aogibbs/sampling.hpp"

#include <string>
#include <vector>

namespace aogibbs {

enum class PressureMethod { Direct, ThermoIntegration, ActivityIntegration };

std::string method_name(PressureMethod m);

/// Finite-volume pressure log(Z) / |Lambda|. Always within [-z, 0] since exp(-z|Lambda|) <= Z <= 1.
struct PressureEstimate {
  double n = 0.0;  // window side
  BoundaryCondition::Kind bc = BoundaryCondition::Kind::Free;
  Estimate log_z_per_volume;
  PressureMethod method = PressureMethod::Direct;
  /// No draw contributed: the value is the lower bound -z, not an estimate.
  bool lower_bound_only = false;
  std::vector<std::string> warnings;
};

/// Z = pi^z[exp(-beta H)] by direct Poisson sampling. The empty sector is known exactly
/// (probability exp(-z|Lambda|), weight 1), so only draws with N >= 1 are sampled and
///   Z = exp(-z|Lambda|) + (1 - exp(-z|Lambda|)) E[exp(-beta H) | N >= 1],
/// which keeps the point estimate inside [exp(-z|Lambda|), 1].
PressureEstimate partition_direct(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                                  long n_samples, std::uint64_t seed, const QuadratureSpec& quad = {});

/// Mean of the chain energy for each of `chains` independent chains, pooled.
Estimate mean_chain_energy(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                           const SamplerOptions& options, int chains, long snapshots, std::uint64_t seed,
                           int threads = 1);

/// log Z(beta_K) = log Z(beta_0) - int_{beta_0}^{beta_K} E_beta[H] d beta, trapezoid on the grid.
/// log Z(beta_0) comes from partition_direct at beta_0. The result refers to the last grid value.
PressureEstimate pressure_thermo_integration(const ModelParams& params, const Window& window,
                                             const BoundaryCondition& bc, const std::vector<double>& beta_grid,
                                             int chains, long snapshots, const SamplerOptions& options,
                                             std::uint64_t seed, long direct_samples = 20000, int threads = 1);

/// Ascending grid from beta_0 (default 1e-3) to beta with `points` values.
std::vector<double> default_beta_grid(double beta, int points, double beta_0 = 1e-3);

/// log Z(z) = -z|Lambda| + int_0^z E_{z'}[N] / z' dz', Gauss-Legendre in z'. The integrand tends to
/// int exp(-beta H(single point)) as z' -> 0, so no endpoint treatment is needed.
/// `nodes` must be one of 7, 10, 15, 20.
PressureEstimate pressure_activity_integration(const ModelParams& params, const Window& window,
                                               const BoundaryCondition& bc, int nodes, int chains, long snapshots,
                                               const SamplerOptions& options, std::uint64_t seed, int threads = 1);

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int nodes);

struct PressureRunOptions {
  PressureMethod method = PressureMethod::ActivityIntegration;
  int nodes = 7;
  int chains = 2;
  long snapshots = 400;
  SamplerOptions sampler;
  /// Sweeps of the periodic chain that produces the Fixed boundary, after its burn-in.
  long zeta_sweeps = 2000;
  /// Thermodynamic-integration grid size and direct-sampling budget.
  int beta_points = 12;
  long direct_samples = 20000;
};

struct BcRow {
  long n;
  PressureEstimate estimate;
};

struct GapRow {
  long n;
  std::string pair;  // "periodic-free" or "fixed-free"
  Estimate gap;
};

struct BcComparison {
  std::vector<BcRow> rows;
  std::vector<GapRow> gaps;
};

/// Pressure on Lambda_n for Periodic, Free and Fixed(zeta), zeta a snapshot of a periodic chain on
/// a larger torus. Independent seeds per (n, bc).
BcComparison pressure_bc_comparison(const ModelParams& params, const std::vector<long>& n_list,
                                    const PressureRunOptions& run, std::uint64_t seed, int threads = 1);

/// Snapshot of a converged periodic chain on Lambda_{n + 2 pad}, used as a tempered boundary for Lambda_n.
Configuration periodic_boundary_snapshot(const ModelParams& params, long n, const SamplerOptions& options,
                                         long sweeps, std::uint64_t seed);

struct PalmCheck {
  Estimate periodic_energy;  // H_{Lambda_n, per}(omega)
  Estimate palm_sum;         // sum over x of the x-wise summand on the periodized configuration
  double z = 0.0;
  bool pass = false;
};

/// H_{Lambda_n,per}(omega) = sum_x [phi_1(x) + sum_k (1/k) sum phi_k(x, ...)] on the torus.
PalmCheck palm_energy_identity_check(const Configuration& config, const Window& window, const ModelParams& params,
                                     const QuadratureSpec& quad, std::uint64_t seed, double z_tolerance = 3.0);

/// f_{H,n}(R_x, theta_x omega): the x-wise expansion with each k-subset weighted by
/// |Lambda_n n (Lambda_n - y_1) n ... | / |Lambda_n| (relative positions y). Neighbours via the metric.
Estimate palm_fhn_summand(const Configuration& config, std::size_t i, double r, double n,
                          const QuadratureSpec& quad, Rng& rng, const Metric& metric = {});

/// |Lambda_n n (Lambda_n - y_1) n ... n (Lambda_n - y_k)| / |Lambda_n| for relative positions y.
double box_overlap_fraction(double n, const std::vector<Point>& ys);

struct EnergyDensityRow {
  long n;
  Estimate direct;  // P[H_{Lambda_n, empty}] / |Lambda_n|
  Estimate palm;    // P^o[f_{H,n}]
  double z = 0.0;
  std::size_t snapshots = 0;
};

/// Snapshots of chains on Lambda_L (L = largest n) with the given boundary condition. For Periodic
/// the snapshot law is stationary on R^d after periodization, and both estimators target the same
/// number for every n; for the other conditions the Palm column is indicative only.
std::vector<EnergyDensityRow> energy_density_curve(const ModelParams& params, const BoundaryCondition& bc,
                                                   const std::vector<long>& n_list, int chains, long snapshots,
                                                   const SamplerOptions& options, std::uint64_t seed,
                                                   int threads = 1);

struct TailRow {
  long N;
  long M;
  Estimate empirical;    // frequency of the complement of Omega*_{N,M}
  double analytic;       // 1 - product formula
  double reference;      // exp(-|Lambda_N|^{1+gamma})
  bool pass;             // empirical <= analytic + 3 sigma
};

/// Poisson sampling on Lambda_M, M the larger of N and the envelope saturation level unless given.
std::vector<TailRow> temperedness_tail_stats(const ModelParams& params, const std::vector<long>& N_list,
                                             long n_samples, std::uint64_t seed,
                                             std::optional<double> gamma = std::nullopt,
                                             std::optional<long> M = std::nullopt);

/// I(pi^{z_p}_Lambda | pi^{z_q}_Lambda) = |Lambda| (z_q - z_p + z_p log(z_p / z_q)).
double poisson_relative_entropy(double z_p, double z_q, double volume);

struct DiscontinuityRow {
  long n;
  double good_energy_density;  // H_{Lambda_n, empty}(omega_good) / |Lambda_n|
  bool good_hardcore;          // hardcore fires for omega_good
  bool bad_hardcore;           // hardcore fires for omega_bad,n on Lambda_{4n}
  double mixture_energy;       // lower bound (1/n) H(mu_bad,n) for P_n; infinite whenever bad_hardcore
};

/// omega_good: points on the lattice 2S(1 + gap) Z^d with mark S (the relative gap keeps touching
/// neighbours apart, since tangency counts as overlap). omega_bad,n: lattice 2n Z^d with mark 2n.
std::vector<DiscontinuityRow> discontinuity_demo(int dim, double S, double r, const std::vector<long>& n_list,
                                                 const QuadratureSpec& quad = {}, double gap = 1e-9,
                                                 std::uint64_t seed = 1);

/// omega_good restricted to Lambda_n.
Configuration good_lattice(int dim, double S, double n, double gap = 1e-9);

}  // namespace aogibbs
