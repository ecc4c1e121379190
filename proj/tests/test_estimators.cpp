#include "aogibbs/estimators.hpp"
#include "aogibbs/stats.hpp"
#include "oracles/sectors.hpp"
#include "support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

using namespace aogibbs;
using testing_support::random_hardcore;

namespace {

ModelParams small_1d(double z, double beta) {
  ModelParams p;
  p.dim = 1;
  p.z = z;
  p.beta = beta;
  p.r = 0.1;
  p.marks = MarkLaw::dirac(0.2);
  return p;
}

/// log Z / |Lambda| from the sector oracle: Z = exp(-z L) sum_N w_N.
double oracle_pressure_1d(double z, double beta) {
  double s = 0.0;
  for (double w : oracle::sector_weights_1d(z, beta, 1.0, 0.2, 0.1)) s += w;
  return -z + std::log(s);
}

SamplerOptions quick(long burn_in = 200, long thin = 5) {
  SamplerOptions o;
  o.burn_in = burn_in;
  o.thin = thin;
  return o;
}

}  // namespace

TEST_CASE("direct partition function") {
  const Window w = Window::centered(1, 1.0);
  SUBCASE("matches the sector oracle") {
    for (auto [z, beta] : {std::pair{1.0, 1.0}, std::pair{3.0, 2.0}}) {
      const auto est = partition_direct(small_1d(z, beta), w, BoundaryCondition::free_bc(), 20000, 4);
      const double truth = oracle_pressure_1d(z, beta);
      INFO("z = " << z << " beta = " << beta << ": " << est.log_z_per_volume.value << " vs " << truth);
      CHECK(std::abs(est.log_z_per_volume.value - truth) < 3.0 * est.log_z_per_volume.std_error);
      CHECK_FALSE(est.lower_bound_only);
    }
  }
  SUBCASE("stays within the hard bounds") {
    ModelParams p;
    p.z = 0.8;
    p.r = 0.3;
    p.marks = MarkLaw::uniform(0.2, 0.5);
    for (auto bc : {BoundaryCondition::free_bc(), BoundaryCondition::periodic()}) {
      const auto est = partition_direct(p, Window::centered(2, 3.0), bc, 2000, 9);
      CHECK(est.log_z_per_volume.value >= -p.z);
      CHECK(est.log_z_per_volume.value <= 0.0);
    }
  }
  SUBCASE("vanishing activity") {
    const auto est = partition_direct(small_1d(1e-8, 1.0), w, BoundaryCondition::free_bc(), 100, 1);
    CHECK(std::abs(est.log_z_per_volume.value) < 1e-7);
  }
  SUBCASE("no contributing draw gives the lower bound") {
    ModelParams p = small_1d(1.0, 1e5);
    const auto est = partition_direct(p, w, BoundaryCondition::free_bc(), 50, 1);
    CHECK(est.lower_bound_only);
    CHECK(est.log_z_per_volume.value == -1.0);
    CHECK_FALSE(est.warnings.empty());
  }
  SUBCASE("large activity warns") {
    const auto est = partition_direct(small_1d(60.0, 1.0), w, BoundaryCondition::free_bc(), 10, 1);
    CHECK_FALSE(est.warnings.empty());
  }
}

TEST_CASE("thermodynamic integration") {
  const Window w = Window::centered(1, 1.0);
  const ModelParams p = small_1d(3.0, 2.0);
  const auto grid = default_beta_grid(2.0, 9);
  CHECK(grid.front() == 1e-3);
  CHECK(grid.back() == doctest::Approx(2.0));
  const auto ti = pressure_thermo_integration(p, w, BoundaryCondition::free_bc(), grid, 2, 1500, quick(), 6, 20000);
  const double truth = oracle_pressure_1d(3.0, 2.0);
  INFO(ti.log_z_per_volume.value << " +- " << ti.log_z_per_volume.std_error << " vs " << truth);
  CHECK(std::abs(ti.log_z_per_volume.value - truth) < 3.0 * ti.log_z_per_volume.std_error);

  const auto one = pressure_thermo_integration(p, w, BoundaryCondition::free_bc(), {1e-3}, 1, 10, quick(), 6, 2000);
  const auto direct = partition_direct(p.with_beta(1e-3), w, BoundaryCondition::free_bc(), 2000, split_seed(6, 0));
  CHECK(one.log_z_per_volume.value == direct.log_z_per_volume.value);
  CHECK(one.method == PressureMethod::ThermoIntegration);

  // log Z decreases in beta since H >= 0.
  const auto start = partition_direct(p.with_beta(1e-3), w, BoundaryCondition::free_bc(), 20000, 3);
  CHECK(ti.log_z_per_volume.value < start.log_z_per_volume.value);

  CHECK_THROWS(pressure_thermo_integration(p, w, BoundaryCondition::free_bc(), {0.5, 0.5}, 1, 10, quick(), 1));
  CHECK_THROWS(pressure_thermo_integration(p, w, BoundaryCondition::free_bc(), {0.0, 0.5}, 1, 10, quick(), 1));
}

TEST_CASE("activity integration") {
  const auto [t, wt] = gauss_legendre(7);
  double s = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    s += wt[i];
    m2 += wt[i] * t[i] * t[i];
  }
  CHECK(s == doctest::Approx(2.0));
  CHECK(m2 == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(gauss_legendre(8));

  const Window w = Window::centered(1, 1.0);
  const ModelParams p = small_1d(3.0, 2.0);
  const auto est = pressure_activity_integration(p, w, BoundaryCondition::free_bc(), 7, 2, 2000, quick(), 8);
  const double truth = oracle_pressure_1d(3.0, 2.0);
  INFO(est.log_z_per_volume.value << " +- " << est.log_z_per_volume.std_error << " vs " << truth);
  CHECK(std::abs(est.log_z_per_volume.value - truth) < 3.0 * est.log_z_per_volume.std_error);

  // The empty boundary is the free condition.
  ModelParams q;
  q.z = 0.3;
  q.marks = MarkLaw::dirac(0.3);
  const Window w2 = Window::centered(2, 3.0);
  const auto a = pressure_activity_integration(q, w2, BoundaryCondition::free_bc(), 7, 1, 50, quick(50, 2), 2);
  const auto b =
      pressure_activity_integration(q, w2, BoundaryCondition::fixed(Configuration(2)), 7, 1, 50, quick(50, 2), 2);
  CHECK(a.log_z_per_volume.value == b.log_z_per_volume.value);
  CHECK(a.log_z_per_volume.std_error == b.log_z_per_volume.std_error);
}

TEST_CASE("boundary-condition comparison table") {
  ModelParams p;
  p.z = 0.2;
  p.marks = MarkLaw::dirac(0.4);
  PressureRunOptions run;
  run.snapshots = 60;
  run.chains = 1;
  run.sampler = quick(50, 2);
  run.zeta_sweeps = 50;
  const auto table = pressure_bc_comparison(p, {3, 4}, run, 5);
  REQUIRE(table.rows.size() == 6);
  REQUIRE(table.gaps.size() == 4);
  for (const auto& row : table.rows) {
    CHECK(row.estimate.log_z_per_volume.value <= 0.0);
    CHECK(row.estimate.log_z_per_volume.value >= -p.z - 5.0 * row.estimate.log_z_per_volume.std_error);
  }
  CHECK(table.gaps[0].pair == "periodic-free");
  CHECK_THROWS(pressure_bc_comparison(p, {4, 3}, run, 5));

  const Configuration zeta = periodic_boundary_snapshot(p, 4, quick(50, 2), 50, 3);
  // Drawn on the torus Lambda_{4 + 2 pad}, pad = ceil(2 (R + r)) + 1 = 3.
  CHECK_FALSE(hardcore_violated(zeta, Window::centered(2, 10.0), BoundaryCondition::periodic()));
  CHECK(restrict_complement(zeta, Window::centered(2, 4.0)).size() > 0);
}

TEST_CASE("palm identity on the torus") {
  ModelParams p;
  p.r = 0.2;
  QuadratureSpec q;
  q.replicates = 32;
  q.points_per_unit_volume = 1e5;
  SUBCASE("trivial cases") {
    const Window w = Window::centered(2, 4.0, true);
    const auto empty = palm_energy_identity_check(Configuration(2), w, p, q, 1);
    CHECK(empty.pass);
    CHECK(empty.periodic_energy.value == 0.0);
    const Configuration one(2, {{make_point({1.9, -1.9}), 0.5}});
    const auto single = palm_energy_identity_check(one, w, p, q, 1);
    CHECK(single.pass);
    CHECK(single.palm_sum.value == doctest::Approx(std::acos(-1.0) * 0.49));
  }
  SUBCASE("random configurations") {
    Rng rng = make_rng(31);
    for (int d : {1, 2}) {
      const Window w = Window::centered(d, 4.0, true);
      for (int trial = 0; trial < 10; ++trial) {
        const Configuration c = random_hardcore(w, 5, 0.1, 0.6, rng);
        const auto res = palm_energy_identity_check(c, w, p, q, 100 + trial);
        INFO("d = " << d << " trial " << trial << ": " << res.periodic_energy.value << " vs " << res.palm_sum.value);
        CHECK(res.pass);
      }
    }
  }
  SUBCASE("overlap rejected") {
    const Window w = Window::centered(1, 4.0, true);
    const Configuration c(1, {{make_point({-1.9}), 0.2}, {make_point({1.9}), 0.2}});
    CHECK_THROWS(palm_energy_identity_check(c, w, p, q, 1));
  }
}

TEST_CASE("finite-volume Palm summand") {
  CHECK(box_overlap_fraction(4.0, {}) == 1.0);
  CHECK(box_overlap_fraction(4.0, {make_point({1.0, -1.0})}) == doctest::Approx(9.0 / 16.0));
  CHECK(box_overlap_fraction(4.0, {make_point({1.0, 0.0}), make_point({-0.5, 0.0})}) == doctest::Approx(2.5 / 4.0));
  CHECK(box_overlap_fraction(2.0, {make_point({3.0})}) == 0.0);

  // Without the box weights the summand is the x-wise one.
  Rng rng = make_rng(8);
  const Window w = Window::centered(2, 5.0);
  QuadratureSpec q;
  q.replicates = 32;
  q.points_per_unit_volume = 2e5;
  for (int trial = 0; trial < 5; ++trial) {
    const Configuration c = random_hardcore(w, 12, 0.2, 0.5, rng);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Estimate a = palm_fhn_summand(c, i, 0.3, 1e12, q, rng);
      const Estimate b = xwise_palm_summand(c, i, 0.3, q, rng);
      CHECK(std::abs(a.value - b.value) <= 4.0 * std::hypot(a.std_error, b.std_error) + 1e-9);
    }
  }
  // Summing the unweighted summands reproduces the union.
  const Configuration c = random_hardcore(w, 10, 0.2, 0.5, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += palm_fhn_summand(c, i, 0.3, 1e12, q, rng).value;
  CHECK(s == doctest::Approx(union_volume_exact(2, testing_support::enlarged(c, 0.3), {})).epsilon(1e-9));
}

TEST_CASE("energy density curve") {
  SUBCASE("direct and Palm estimators agree on the torus") {
    ModelParams p;
    p.z = 0.6;
    p.r = 0.15;
    p.marks = MarkLaw::uniform(0.15, 0.35);
    const auto rows = energy_density_curve(p, BoundaryCondition::periodic(), {2, 3, 5}, 2, 300, quick(100, 3), 12);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
      INFO("n = " << row.n << ": " << row.direct.value << " vs " << row.palm.value);
      CHECK(std::abs(row.z) <= 3.0);
      CHECK(row.direct.value > 0.0);
    }
  }
  SUBCASE("vanishing activity") {
    ModelParams p;
    p.z = 1e-9;
    const auto rows = energy_density_curve(p, BoundaryCondition::free_bc(), {3}, 1, 20, quick(10, 1), 1);
    CHECK(rows[0].direct.value == 0.0);
    CHECK(rows[0].palm.value == 0.0);
  }
  SUBCASE("dilute limit") {
    ModelParams p;
    p.z = 0.02;
    p.beta = 10.0;
    p.r = 0.1;
    p.marks = MarkLaw::dirac(0.3);
    const Window w = Window::centered(2, 6.0, true);
    std::vector<double> n;
    GibbsSampler chain(p, w, BoundaryCondition::periodic(), quick(100, 3), 4);
    chain.run(400, [&](const ChainState& s) { n.push_back(static_cast<double>(s.config.size())); });
    const double mean_density = mean_estimate(n).value / w.volume();
    const auto rows = energy_density_curve(p, BoundaryCondition::periodic(), {6}, 1, 400, quick(100, 3), 4);
    const double dilute = mean_density * std::acos(-1.0) * 0.16;
    CHECK(rows[0].palm.value == doctest::Approx(dilute).epsilon(0.02));
  }
}

TEST_CASE("temperedness tail statistics") {
  ModelParams p;
  p.z = 0.5;
  p.marks = MarkLaw::truncated_weibull(0.9, 3.0, 3.0, 0.5);
  const auto env = TemperednessEnvelope::for_params(p);
  SUBCASE("single level formula") {
    for (long N : {1L, 2L, 3L}) {
      const double expected =
          1.0 - std::exp(-p.z * std::pow(static_cast<double>(N), 2) * p.marks.tail(env.g(static_cast<double>(N))));
      CHECK(1.0 - poisson_tempered_probability(p, env, N, N) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("empirical below analytic and decreasing") {
    const auto rows = temperedness_tail_stats(p, {1, 2, 3}, 4000, 7);
    for (const auto& row : rows) {
      INFO("N = " << row.N << " empirical " << row.empirical.value << " analytic " << row.analytic);
      CHECK(row.pass);
      CHECK(std::abs(row.empirical.value - row.analytic) < 4.0 * row.empirical.std_error + 1e-3);
    }
    CHECK(rows[0].empirical.value >= rows[1].empirical.value);
    CHECK(rows[1].analytic >= rows[2].analytic);
  }
  SUBCASE("small Dirac radius never violates") {
    ModelParams q;
    q.marks = MarkLaw::dirac(0.5);
    for (const auto& row : temperedness_tail_stats(q, {1, 2}, 200, 1)) {
      CHECK(row.empirical.value == 0.0);
      CHECK(row.analytic == 0.0);
    }
  }
}

TEST_CASE("poisson relative entropy") {
  CHECK(poisson_relative_entropy(0.7, 0.7, 10.0) == 0.0);
  Rng rng = make_rng(2);
  for (int i = 0; i < 20; ++i) {
    const double a = 0.1 + 3.0 * uniform01(rng), b = 0.1 + 3.0 * uniform01(rng);
    CHECK(poisson_relative_entropy(a, b, 4.0) >= 0.0);
  }
  CHECK(poisson_relative_entropy(1.0, 1.0 + 1e-9, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(poisson_relative_entropy(0.0, 1.0, 1.0));
  CHECK_THROWS(poisson_relative_entropy(1.0, -1.0, 1.0));
}

TEST_CASE("discontinuity construction") {
  SUBCASE("one dimension against interval arithmetic") {
    const auto rows = discontinuity_demo(1, 1.0, 0.25, {4, 10, 40});
    for (const auto& row : rows) {
      CHECK_FALSE(row.good_hardcore);
      CHECK(row.bad_hardcore);
      CHECK(std::isinf(row.mixture_energy));
      std::vector<std::pair<double, double>> iv;
      const double a = 2.0 * (1.0 + 1e-9);
      for (long k = -row.n; k <= row.n; ++k) {
        if (k * a >= -0.5 * row.n && k * a < 0.5 * row.n) iv.push_back({k * a, 1.25});
      }
      const double len = oracle::interval_union(iv);
      CHECK(row.good_energy_density == doctest::Approx(len / row.n).epsilon(1e-12));
    }
    // The enlarged intervals cover the line, so the density tends to 1.
    CHECK(std::abs(rows.back().good_energy_density - 1.0) < std::abs(rows.front().good_energy_density - 1.0));
  }
  SUBCASE("two dimensions") {
    const auto rows = discontinuity_demo(2, 0.5, 0.1, {2, 4, 8});
    for (const auto& row : rows) {
      CHECK_FALSE(row.good_hardcore);
      CHECK(row.bad_hardcore);
      CHECK(row.good_energy_density > 0.0);
      CHECK(row.good_energy_density < 2.0);
    }
  }
  CHECK(good_lattice(2, 1.0, 5.0).size() == 9);
  CHECK(discontinuity_demo(1, 1.0, 0.25, {}).empty());
}
