#include "aogibbs/sampling.hpp"
#include "aogibbs/stats.hpp"
#include "oracles/sectors.hpp"
#include "support.hpp"

#include <boost/math/distributions/poisson.hpp>
#include <doctest.h>

using namespace aogibbs;
using testing_support::chi_square_p;
using testing_support::overlaps_brute;

namespace {

ModelParams dirac_params(int d, double z, double beta, double R, double r) {
  ModelParams p;
  p.dim = d;
  p.z = z;
  p.beta = beta;
  p.r = r;
  p.marks = MarkLaw::dirac(R);
  return p;
}

std::vector<long> count_histogram(const std::vector<ChainState>& states, std::size_t cells) {
  std::vector<long> h(cells, 0);
  for (const auto& s : states) h[std::min(s.config.size(), cells - 1)]++;
  return h;
}

}  // namespace

TEST_CASE("poisson sampler moments") {
  const ModelParams p = dirac_params(2, 0.75, 1.0, 0.3, 0.1);
  const Window w = Window::centered(2, 2.0);
  Rng rng = make_rng(11);
  std::vector<double> counts;
  for (int i = 0; i < 10000; ++i) {
    const Configuration c = sample_poisson(p, w, rng);
    for (const auto& q : c) {
      CHECK(q.radius == 0.3);
      CHECK(w.contains(q.x));
    }
    counts.push_back(static_cast<double>(c.size()));
  }
  const Estimate m = mean_estimate(counts);
  CHECK(std::abs(m.value - 3.0) < 3.0 * m.std_error);
  double var = 0.0;
  for (double c : counts) var += (c - m.value) * (c - m.value);
  var /= static_cast<double>(counts.size() - 1);
  // The sample variance of Poisson(3) counts has sd about sqrt((mu + 2 mu^2) / n) = 0.046.
  CHECK(std::abs(var - 3.0) < 0.2);

  const Configuration a = sample_poisson(p, w, 5), b = sample_poisson(p, w, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].x == b[i].x);
}

TEST_CASE("move mix and options validation") {
  MoveMix m;
  CHECK_NOTHROW(m.validate());
  m.birth = 0.4;
  CHECK_THROWS(m.validate());
  m = MoveMix{0.3, 0.4, 0.2, 0.1};
  CHECK_THROWS(m.validate());
  m = MoveMix{0.5, 0.5, 0.0, 0.0};
  CHECK_NOTHROW(m.validate());
  SamplerOptions o;
  o.thin = 0;
  CHECK_THROWS(o.validate());
}

TEST_CASE("sampler matches the sector oracle in d=1") {
  for (auto [z, beta] : {std::pair{1.0, 1.0}, std::pair{4.0, 3.0}}) {
    const ModelParams p = dirac_params(1, z, beta, 0.2, 0.1);
    const auto probs = oracle::normalized(oracle::sector_weights_1d(z, beta, 1.0, 0.2, 0.1));
    SamplerOptions o;
    o.burn_in = 200;
    o.thin = 20;
    const auto states = gibbs_mcmc(p, Window::centered(1, 1.0), BoundaryCondition::free_bc(), o, 3000, 17);
    const double pv = chi_square_p(count_histogram(states, 5), probs);
    INFO("z = " << z << ", beta = " << beta << ", p = " << pv);
    CHECK(pv > 0.01);
  }
}

TEST_CASE("sampler matches the sector oracle in d=2") {
  const ModelParams p = dirac_params(2, 1.0, 0.2, 0.52, 0.1);
  const auto probs = oracle::normalized(oracle::sector_weights_2d(1.0, 0.2, 1.0, 0.52, 0.1));
  SamplerOptions o;
  o.burn_in = 200;
  o.thin = 20;
  const auto states = gibbs_mcmc(p, Window::centered(2, 1.0), BoundaryCondition::free_bc(), o, 3000, 23);
  const double pv = chi_square_p(count_histogram(states, 4), probs);
  INFO("p = " << pv);
  CHECK(pv > 0.01);
}

TEST_CASE("vanishing interaction gives a Poisson count") {
  // Point marks and a tiny polymer radius: the energy is negligible and there is no hardcore.
  const ModelParams p = dirac_params(2, 0.75, 1.0, 0.0, 1e-4);
  SamplerOptions o;
  o.burn_in = 100;
  o.thin = 5;
  const auto states = gibbs_mcmc(p, Window::centered(2, 2.0), BoundaryCondition::periodic(), o, 4000, 3);
  boost::math::poisson_distribution<> law(3.0);
  std::vector<double> probs;
  for (int k = 0; k < 9; ++k) probs.push_back(boost::math::pdf(law, k));
  probs.push_back(boost::math::cdf(boost::math::complement(law, 8)));
  const double pv = chi_square_p(count_histogram(states, 10), probs);
  INFO("p = " << pv);
  CHECK(pv > 0.01);
}

TEST_CASE("chain stays hardcore-respecting and audits cleanly") {
  SUBCASE("periodic d=2, exact energies") {
    ModelParams p;
    p.dim = 2;
    p.z = 2.0;
    p.r = 0.15;
    p.marks = MarkLaw::uniform(0.1, 0.4);
    SamplerOptions o;
    o.burn_in = 20;
    o.thin = 5;
    o.audit_every = 1;
    GibbsSampler chain(p, Window::centered(2, 3.0), BoundaryCondition::periodic(), o, 99);
    chain.run(100, [&](const ChainState& s) {
      CHECK_FALSE(overlaps_brute(s.config, chain.window()));
      for (const auto& q : s.config) CHECK(chain.window().contains(q.x));
    });
    CHECK(chain.state().max_audit_gap < 1e-9);
    CHECK(chain.state().stats.accepted[static_cast<int>(MoveKind::Translate)] > 0);
    CHECK(chain.state().stats.accepted[static_cast<int>(MoveKind::Resize)] > 0);
  }
  SUBCASE("free d=3, quadrature energies") {
    ModelParams p;
    p.dim = 3;
    p.z = 0.5;
    p.r = 0.2;
    p.marks = MarkLaw::dirac(0.3);
    SamplerOptions o;
    o.burn_in = 5;
    o.thin = 2;
    o.audit_every = 3;
    o.quad.points_per_unit_volume = 2e4;
    o.quad.replicates = 8;
    GibbsSampler chain(p, Window::centered(3, 2.0), BoundaryCondition::free_bc(), o, 5);
    CHECK_NOTHROW(chain.run(20, [&](const ChainState& s) { CHECK_FALSE(overlaps_brute(s.config, chain.window())); }));
  }
}

TEST_CASE("same seed, same stream") {
  ModelParams p;
  p.z = 1.5;
  p.marks = MarkLaw::uniform(0.1, 0.3);
  SamplerOptions o;
  o.burn_in = 10;
  o.thin = 3;
  const Window w = Window::centered(2, 3.0);
  const auto a = gibbs_mcmc(p, w, BoundaryCondition::free_bc(), o, 20, 42);
  const auto b = gibbs_mcmc(p, w, BoundaryCondition::free_bc(), o, 20, 42);
  const auto c = gibbs_mcmc(p, w, BoundaryCondition::free_bc(), o, 20, 43);
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    REQUIRE(a[k].config.size() == b[k].config.size());
    for (std::size_t i = 0; i < a[k].config.size(); ++i) {
      CHECK(a[k].config[i].x == b[k].config[i].x);
      CHECK(a[k].config[i].radius == b[k].config[i].radius);
    }
    CHECK(a[k].energy.area == b[k].energy.area);
    differs = differs || a[k].config.size() != c[k].config.size();
  }
  CHECK(differs);
}

TEST_CASE("boundary validation") {
  ModelParams p;
  p.marks = MarkLaw::dirac(0.5);
  p.r = 0.2;
  SamplerOptions o;
  CHECK_THROWS_AS(GibbsSampler(p, Window::centered(2, 1.2), BoundaryCondition::periodic(), o, 1),
                  std::invalid_argument);
  CHECK_NOTHROW(GibbsSampler(p, Window::centered(2, 1.5), BoundaryCondition::periodic(), o, 1));

  // A huge ball just outside the window exceeds the envelope at that level.
  Configuration bad(2, {{make_point({2.2, 0.0}), 50.0}});
  CHECK_THROWS_AS(GibbsSampler(p, Window::centered(2, 4.0), BoundaryCondition::fixed(bad), o, 1),
                  std::invalid_argument);
  Configuration good(2, {{make_point({2.6, 0.0}), 0.5}, {make_point({-3.0, 1.0}), 0.5}});
  GibbsSampler chain(p, Window::centered(2, 4.0), BoundaryCondition::fixed(good), o, 1);
  CHECK(chain.state().config.empty());

  // The initial state must respect the hardcore.
  Configuration clash(2, {{make_point({0.0, 0.0}), 0.5}, {make_point({0.5, 0.0}), 0.5}});
  CHECK_THROWS(GibbsSampler(p, Window::centered(2, 4.0), BoundaryCondition::free_bc(), o, 1, clash));
}

TEST_CASE("fixed boundary is respected") {
  ModelParams p;
  p.z = 3.0;
  p.r = 0.1;
  p.marks = MarkLaw::dirac(0.3);
  const Window w = Window::centered(2, 2.0);
  Configuration ring(2);
  for (int k = 0; k < 12; ++k) {
    const double t = 2.0 * std::acos(-1.0) * k / 12.0;
    ring.insert({make_point({1.25 * std::cos(t), 1.25 * std::sin(t)}), 0.3});
  }
  const Configuration outside = restrict_complement(ring, w);
  SamplerOptions o;
  o.burn_in = 20;
  o.thin = 5;
  GibbsSampler chain(p, w, BoundaryCondition::fixed(ring), o, 8);
  chain.run(50, [&](const ChainState& s) {
    for (const auto& q : s.config) {
      for (const auto& b : outside) CHECK((q.x - b.x).norm() > q.radius + b.radius);
    }
  });
}

TEST_CASE("strong repulsion thins the configurations") {
  ModelParams weak, strong;
  weak.z = strong.z = 1.0;
  weak.r = strong.r = 0.5;
  weak.marks = strong.marks = MarkLaw::dirac(0.1);
  weak.beta = 0.01;
  strong.beta = 5.0;
  SamplerOptions o;
  o.burn_in = 50;
  o.thin = 5;
  const Window w = Window::centered(2, 3.0);
  auto mean_n = [&](const ModelParams& p) {
    double s = 0.0;
    const auto states = gibbs_mcmc(p, w, BoundaryCondition::free_bc(), o, 200, 4);
    for (const auto& st : states) s += static_cast<double>(st.config.size());
    return s / static_cast<double>(states.size());
  };
  CHECK(mean_n(strong) < 0.5 * mean_n(weak));
}

TEST_CASE("dlr consistency on a small window") {
  ModelParams p;
  p.z = 1.0;
  p.r = 0.1;
  p.marks = MarkLaw::uniform(0.1, 0.25);
  SamplerOptions o;
  o.burn_in = 100;
  o.thin = 4;
  const Window outer = Window::centered(2, 2.5);
  const Window inner = Window::centered(2, 1.0);
  const auto report = dlr_consistency_check(p, outer, inner, BoundaryCondition::free_bc(), o, 600, 30, 77);
  REQUIRE(report.rows.size() == 3);
  for (const auto& row : report.rows) {
    INFO(row.name << ": " << row.a.value << " vs " << row.b.value << ", z = " << row.z);
    CHECK(std::abs(row.z) <= 4.0);
  }

  ModelParams tiny = p;
  tiny.z = 1e-9;
  const auto empty = dlr_consistency_check(tiny, outer, inner, BoundaryCondition::free_bc(), o, 40, 5, 1);
  for (const auto& row : empty.rows) {
    CHECK(row.a.value == 0.0);
    CHECK(row.b.value == 0.0);
  }
  CHECK_THROWS(dlr_consistency_check(p, inner, outer, BoundaryCondition::free_bc(), o, 10, 5, 1));
}

TEST_CASE("fkg temperedness inequality") {
  SUBCASE("small Dirac radius: both sides are one") {
    ModelParams p;
    p.marks = MarkLaw::dirac(0.4);
    SamplerOptions o;
    o.burn_in = 10;
    o.thin = 2;
    const auto rows =
        fkg_temperedness_check(p, Window::centered(2, 2.0), BoundaryCondition::free_bc(), {1, 2, 4}, o, 50, 3);
    for (const auto& r : rows) {
      CHECK(r.gibbs.value == 1.0);
      CHECK(r.poisson.value == 1.0);
      CHECK(r.poisson_analytic == 1.0);
      CHECK(r.holds);
    }
  }
  SUBCASE("heavy marks") {
    ModelParams p;
    p.z = 0.3;
    p.r = 0.1;
    p.marks = MarkLaw::truncated_weibull(0.8, 3.0, 2.5, 0.5);
    SamplerOptions o;
    o.burn_in = 50;
    o.thin = 3;
    const auto rows =
        fkg_temperedness_check(p, Window::centered(2, 6.0), BoundaryCondition::free_bc(), {1, 2, 3}, o, 800, 9);
    for (const auto& r : rows) {
      INFO("K = " << r.K << ": gibbs " << r.gibbs.value << ", poisson " << r.poisson.value << ", analytic "
                  << r.poisson_analytic);
      CHECK(r.holds);
      // Binomial spread from the analytic value, so an all-ones sample is not judged on a zero stderr.
      const double sd = std::sqrt(r.poisson_analytic * (1.0 - r.poisson_analytic) / 800.0);
      CHECK(std::abs(r.poisson.value - r.poisson_analytic) <= 4.0 * sd + 1.0 / 800.0);
    }
    CHECK(rows[0].poisson_analytic < rows[2].poisson_analytic);
  }
}
