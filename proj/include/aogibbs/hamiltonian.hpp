#pragma once

#include "aogibbs/configuration.hpp"
#include "aogibbs/geometry.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace aogibbs {

struct BoundaryCondition {
  enum class Kind { Free, Periodic, Fixed };

  Kind kind = Kind::Free;
  /// Boundary configuration zeta (Fixed only). Only its points outside the window are used.
  std::shared_ptr<const Configuration> outer;

  static BoundaryCondition free_bc() { return {}; }
  static BoundaryCondition periodic() { return {Kind::Periodic, nullptr}; }
  static BoundaryCondition fixed(Configuration outer);

  std::string name() const;
};

/// Hardcore is a veto: finite == false means e^{-beta H} = 0.
struct EnergyValue {
  bool finite = true;
  double area = 0.0;
  double std_error = 0.0;

  static EnergyValue infinite() { return {false, 0.0, 0.0}; }
  static EnergyValue from(const Estimate& e) { return {true, e.value, e.std_error}; }
  double boltzmann(double beta) const { return finite ? std::exp(-beta * area) : 0.0; }
};

/// Energy evaluation for configurations inside a window under one boundary condition.
///
/// Precomputes the boundary balls of a Fixed condition (zeta outside the window);
/// everything else is evaluated on demand from the configuration passed in.
class Hamiltonian {
 public:
  Hamiltonian(const Window& window, BoundaryCondition bc, double r, QuadratureSpec quad = {});

  const Window& window() const { return window_; }
  const BoundaryCondition& bc() const { return bc_; }
  double polymer_radius() const { return r_; }
  const QuadratureSpec& quadrature() const { return quad_; }
  /// zeta restricted to the complement of the window (empty unless Fixed).
  const Configuration& boundary() const { return boundary_; }
  Metric metric() const { return bc_.kind == BoundaryCondition::Kind::Periodic ? Metric::torus(window_) : Metric(); }

  bool hardcore_violated(const Configuration& config) const;
  Estimate area_energy(const Configuration& config, Rng& rng) const;
  EnergyValue conditional_energy(const Configuration& config, Rng& rng) const;

  /// |B(x, R + r) \ (other enlarged balls and boundary balls)|, or infinite on a hardcore overlap.
  /// `skip` excludes one stored point (the one being moved or removed).
  EnergyValue local_energy(const Configuration& config, const MarkedPoint& p, std::optional<std::size_t> skip,
                           Rng& rng) const;

  EnergyValue delta_insert(const Configuration& config, const MarkedPoint& p, Rng& rng) const;
  /// Nonpositive area change from removing point i (removal never creates an overlap).
  Estimate delta_delete(const Configuration& config, std::size_t i, Rng& rng) const;
  /// Energy change from replacing point i by p; nullopt if p overlaps.
  std::optional<Estimate> delta_replace(const Configuration& config, std::size_t i, const MarkedPoint& p,
                                        Rng& rng) const;

 private:
  bool in_window(const Point& x) const;
  bool overlaps(const Configuration& config, const MarkedPoint& p, std::optional<std::size_t> skip) const;
  Estimate uncovered(const Configuration& config, const MarkedPoint& p, std::optional<std::size_t> skip,
                     Rng& rng) const;
  std::vector<Ball> enlarged_inner(const Configuration& config) const;
  std::vector<Ball> boundary_balls_near(const Ball& ball) const;

  Window window_;
  BoundaryCondition bc_;
  double r_;
  QuadratureSpec quad_;
  Configuration boundary_;
};

bool hardcore_violated(const Configuration& config, const Window& window, const BoundaryCondition& bc);

Estimate area_energy(const Configuration& config, const Window& window, const BoundaryCondition& bc, double r,
                     const QuadratureSpec& quad, Rng& rng);

EnergyValue conditional_energy(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                               double r, const QuadratureSpec& quad, Rng& rng);

EnergyValue energy_delta_insert(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                                const MarkedPoint& p, double r, const QuadratureSpec& quad, Rng& rng);

Estimate energy_delta_delete(const Configuration& config, const Window& window, const BoundaryCondition& bc,
                             std::size_t i, double r, const QuadratureSpec& quad, Rng& rng);

struct KBodyTerm {
  int k;
  /// Sum over k-subsets of phi_k = (-1)^{k-1} |intersection of the k enlarged balls|.
  Estimate signed_sum;
};

/// Terms k = 1..k_max of the inclusion-exclusion expansion of the area energy (free, euclidean).
/// Limited to 10 points.
std::vector<KBodyTerm> kbody_expansion(const Configuration& config, double r, int k_max, const QuadratureSpec& quad,
                                       Rng& rng);

/// phi_1(x) + sum_k (1/k) sum phi_k(x, y_1..y_{k-1}), evaluated as
/// |B_x| - int_{B_x} (#other balls covering z) / (#balls covering z) dz.
/// Exact in d = 1, and in d = 2 when quad.exact_when_available; quadrature otherwise. The metric may be a torus for periodized configurations.
Estimate xwise_palm_summand(const Configuration& config, std::size_t i, double r, const QuadratureSpec& quad,
                            Rng& rng, const Metric& metric = {});

}  // namespace aogibbs
