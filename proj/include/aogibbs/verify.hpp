#pragma once

#include "aogibbs/spec_file.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aogibbs {

/// One property check. Every case contributes a z-score; the check passes when every |z| <= threshold,
/// or for one-sided checks every z >= threshold (z is then the signed slack, negative for a violation).
struct CheckResult {
  std::string name;
  std::vector<double> z_scores;
  double threshold = 3.0;
  bool one_sided = false;
  /// Failures that are not z-scores (e.g. a violated deterministic bound).
  long violations = 0;
  bool pass = false;
  std::string detail;

  double worst() const;
};

/// Standardized difference. With a zero standard error, a difference within the round-off tolerance
/// counts as z = 0 and anything else as an infinite z.
double zscore(double diff, double se, double tol = 1e-9);
/// Slack diff / se of a one-sided inequality diff >= 0; with a zero standard error, 0 when
/// diff >= -tol and minus infinity otherwise.
double one_sided_z(double diff, double se, double tol = 1e-9);

/// Re-evaluates `pass` under a new threshold.
void set_threshold(CheckResult& res, double threshold);

/// Two-sided normal threshold that holds the family-wise false alarm rate of n cases at 1e-3.
double family_threshold(long n);

/// Random hardcore configuration in the window (torus distances if the window is a torus), up to
/// `n` points, radii uniform in [r_lo, r_hi].
Configuration random_hardcore_configuration(const Window& w, int n, double r_lo, double r_hi, Rng& rng);

// Energy suite.
CheckResult check_inclusion_exclusion(long configs, std::uint64_t seed);
CheckResult check_three_body_truncation(long configs, std::uint64_t seed);
CheckResult check_paper_square(std::uint64_t seed);
CheckResult check_energy_sandwich(long configs, std::uint64_t seed);
/// Identity sum_x summand = H^ar, and the single-term bound |summand - phi_1| <= |B(x,R+r) \ B(x,R)|.
std::pair<CheckResult, CheckResult> check_xwise_palm(long configs, std::uint64_t seed);
CheckResult check_insert_monotone(long pairs, std::uint64_t seed);
CheckResult check_partition_bounds(long samples, std::uint64_t seed);

// Geometry suite.
CheckResult check_lens_closed_form(long pairs, std::uint64_t seed);
CheckResult check_union_quadrature(long configs, std::uint64_t seed);
CheckResult check_torus_union(long configs, std::uint64_t seed);
CheckResult check_critical_ratio();

// Palm suite.
CheckResult check_stationary_field(long configs, std::uint64_t seed);
CheckResult check_finite_volume_summand(long configs, std::uint64_t seed);

// Temperedness suite.
CheckResult check_poisson_tail(long samples, std::uint64_t seed);
CheckResult check_tail_formula();
CheckResult check_fkg(long samples, std::uint64_t seed);
CheckResult check_relative_entropy(int pairs, long samples, std::uint64_t seed);

// DLR suite.
CheckResult check_dlr(long samples, std::uint64_t seed);

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"energy", "geometry", "palm", "temperedness", "dlr"};
  return names;
}

/// Runs one suite (or "all") at sizes scaled by spec.verify_scale. Throws std::invalid_argument for an
/// unknown suite name.
std::vector<CheckResult> run_verify(const std::string& suite, const ExperimentSpec& spec, std::uint64_t seed,
                                    int threads = 1);

/// Deterministic JSON report (no timestamps).
std::string verify_report_json(const std::string& suite, std::uint64_t seed, const std::vector<CheckResult>& results);

}  // namespace aogibbs
