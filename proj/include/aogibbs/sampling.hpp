#pragma once

#include "aogibbs/hamiltonian.hpp"
#include "aogibbs/model.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aogibbs {

/// Marked Poisson process on the window: N ~ Poisson(z |Lambda|), uniform positions, iid marks.
Configuration sample_poisson(const ModelParams& params, const Window& window, Rng& rng);
Configuration sample_poisson(const ModelParams& params, const Window& window, std::uint64_t seed);

enum class MoveKind { Birth = 0, Death = 1, Translate = 2, Resize = 3 };

struct MoveMix {
  double birth = 0.35;
  double death = 0.35;
  double translate = 0.2;
  double resize = 0.1;

  void validate() const;
};

struct MoveStats {
  std::array<std::uint64_t, 4> proposed{};
  std::array<std::uint64_t, 4> accepted{};

  double acceptance(MoveKind k) const {
    const auto i = static_cast<std::size_t>(k);
    return proposed[i] ? static_cast<double>(accepted[i]) / static_cast<double>(proposed[i]) : 0.0;
  }
};

struct SamplerOptions {
  MoveMix mix;
  long burn_in = 1000;
  long thin = 10;
  /// Half-width of the uniform translate proposal, per coordinate.
  double translate_step = 0.5;
  /// Full energy recomputation every this many sweeps (0 disables).
  long audit_every = 200;
  QuadratureSpec quad;
  /// Envelope parameter for the temperedness check of a Fixed boundary; default delta / (2d).
  std::optional<double> gamma;

  void validate() const;
};

struct ChainState {
  Configuration config;
  EnergyValue energy;
  long sweep_count = 0;
  std::uint64_t rng_seed = 0;
  MoveStats stats;
  /// Quadrature variance accumulated by the cached energy since the last audit.
  double energy_budget_var = 0.0;
  /// Largest |cached - recomputed| seen at an audit.
  double max_audit_gap = 0.0;
};

/// Metropolis-Hastings chain targeting the finite-volume Gibbs measure
/// (1/Z) exp(-beta H_{Lambda,zeta}) d pi^z_Lambda.
class GibbsSampler {
 public:
  GibbsSampler(ModelParams params, const Window& window, BoundaryCondition bc, SamplerOptions options,
               std::uint64_t seed, std::optional<Configuration> initial = std::nullopt);

  const ChainState& state() const { return state_; }
  const Hamiltonian& hamiltonian() const { return ham_; }
  const ModelParams& params() const { return params_; }
  const Window& window() const { return ham_.window(); }
  /// Proposals per sweep. Starts at max(1, round(z |Lambda|)) and is frozen at the burn-in mean of
  /// max(N, 1) when burn-in ends. It never depends on the current state: snapshots taken after a
  /// state-dependent number of proposals are not distributed according to the target.
  long sweep_length() const { return sweep_length_; }

  /// One proposal. Returns whether it was accepted.
  bool step();
  /// `sweep_length()` proposals.
  void sweep();
  void sweeps(long n);
  /// Recomputes the energy from scratch, records the gap and resets the cached value.
  double audit();

  /// Burn-in (unless already done), then `n_snapshots` states spaced `thin` sweeps apart.
  void run(long n_snapshots, const std::function<void(const ChainState&)>& on_snapshot);
  std::vector<ChainState> run(long n_snapshots);

 private:
  void validate_boundary() const;
  bool propose_birth();
  bool propose_death();
  bool propose_translate();
  bool propose_resize();
  bool accept(double log_ratio);
  void add_energy(const Estimate& delta);

  ModelParams params_;
  Hamiltonian ham_;
  SamplerOptions options_;
  Rng rng_;
  ChainState state_;
  long since_audit_ = 0;
  long sweep_length_ = 1;
  bool burned_in_ = false;
};

/// Snapshot stream of a fresh chain (burn-in, then thinned snapshots).
std::vector<ChainState> gibbs_mcmc(const ModelParams& params, const Window& window, const BoundaryCondition& bc,
                                   const SamplerOptions& options, long n_snapshots, std::uint64_t seed);

struct ComparisonRow {
  std::string name;
  Estimate a;
  Estimate b;
  double z = 0.0;
};

double comparison_z(const Estimate& a, const Estimate& b);

struct DlrReport {
  std::vector<ComparisonRow> rows;  // a = direct, b = two-stage
  double max_abs_z() const;
};

/// Compares omega_Delta under G_Lambda with the two-stage law: draw zeta' from G_Lambda, then
/// resample Delta from G_{Delta, zeta'} by a fresh chain started empty and run `inner_sweeps` sweeps.
DlrReport dlr_consistency_check(const ModelParams& params, const Window& outer, const Window& inner,
                                const BoundaryCondition& bc, const SamplerOptions& options, long n_samples,
                                long inner_sweeps, std::uint64_t seed);

struct FkgRow {
  long K;
  Estimate gibbs;            // G_{Lambda,zeta}((Omega_Lambda)*_K) by MCMC
  Estimate poisson;          // pi^z(Omega*_K) by direct sampling on the saturation box
  double poisson_analytic;   // product formula
  bool holds;                // gibbs >= poisson - 3 sigma
};

std::vector<FkgRow> fkg_temperedness_check(const ModelParams& params, const Window& window,
                                           const BoundaryCondition& bc, const std::vector<long>& K_grid,
                                           const SamplerOptions& options, long n_samples, std::uint64_t seed,
                                           std::optional<double> gamma = std::nullopt);

}  // namespace aogibbs
