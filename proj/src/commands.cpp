#include "aogibbs/commands.hpp"

#include "aogibbs/io.hpp"
#include "aogibbs/stats.hpp"
#include "aogibbs/verify.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>

#ifndef AOGIBBS_VERSION
#define AOGIBBS_VERSION "0.0.0"
#endif

namespace aogibbs {

namespace fs = std::filesystem;

std::string code_version() { return AOGIBBS_VERSION; }

std::string spec_hash(const ExperimentSpec& spec) { return sha256_hex(canonical_spec(spec)); }

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["spec_hash"] = m.spec_hash;
  j["code_version"] = m.code_version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["seeds"] = m.seeds;
  nlohmann::ordered_json chains = nlohmann::ordered_json::array();
  for (const auto& [seed, per_chain] : m.chain_seeds) chains.push_back({{"seed", seed}, {"chains", per_chain}});
  j["chain_seeds"] = chains;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void say(const RunContext& ctx, const std::string& msg) {
  if (!ctx.quiet && ctx.log) *ctx.log << msg << "\n";
}

void warn(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << "warning: " << msg << "\n";
}

/// Opens the output directory and tracks the files written; the manifest is written last.
class Run {
 public:
  Run(const RunContext& ctx, std::string command) : ctx_(ctx) {
    m_.command = std::move(command);
    m_.spec_hash = spec_hash(ctx.spec);
    m_.code_version = code_version();
    m_.started = utc_now();
    m_.seeds = ctx.spec.seeds;
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec || !fs::is_directory(ctx.out_dir)) {
      throw std::runtime_error("cannot create output directory '" + ctx.out_dir + "'");
    }
  }

  std::string file(const std::string& name) {
    m_.outputs.push_back(name);
    return (fs::path(ctx_.out_dir) / name).string();
  }
  void chains(std::uint64_t seed, std::vector<std::uint64_t> per_chain) {
    m_.chain_seeds.emplace_back(seed, std::move(per_chain));
  }
  const std::string& hash() const { return m_.spec_hash; }

  void finish() {
    m_.finished = utc_now();
    const auto path = (fs::path(ctx_.out_dir) / "manifest.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << manifest_json(m_);
  }

 private:
  const RunContext& ctx_;
  RunManifest m_;
};

BoundaryCondition make_bc(const ExperimentSpec& spec) {
  if (spec.bc == "periodic") return BoundaryCondition::periodic();
  if (spec.bc == "fixed") {
    Snapshot s;
    try {
      s = load_snapshot(spec.bc_path);
    } catch (const std::exception& e) {
      throw SpecError(spec.source, spec.bc_path_line, "bc.path", e.what());
    }
    if (s.dim != spec.model.dim) {
      throw SpecError(spec.source, spec.bc_path_line, "bc.path",
                      "snapshot dimension " + std::to_string(s.dim) + " does not match model.dim");
    }
    return BoundaryCondition::fixed(std::move(s.config));
  }
  return BoundaryCondition::free_bc();
}

Window make_window(const ExperimentSpec& spec) {
  return Window::centered(spec.model.dim, spec.window_side, spec.bc == "periodic");
}

std::vector<std::uint64_t> chain_seeds(std::uint64_t seed, int chains) {
  std::vector<std::uint64_t> out;
  for (int c = 0; c < chains; ++c) out.push_back(split_seed(seed, static_cast<std::uint64_t>(c)));
  return out;
}

}  // namespace

int cmd_sample(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  Run run(ctx, "sample");
  const Window w = make_window(spec);
  const BoundaryCondition bc = make_bc(spec);
  CsvWriter csv(run.file("sample.csv"), run.hash());
  for (std::uint64_t seed : spec.seeds) {
    const auto seeds = chain_seeds(seed, spec.chains);
    run.chains(seed, seeds);
    std::vector<Configuration> last(seeds.size(), Configuration(spec.model.dim));
    std::vector<MoveStats> stats(seeds.size());
    std::vector<std::vector<double>> counts(seeds.size()), energies(seeds.size());
    parallel_for(seeds.size(), ctx.threads, [&](std::size_t c) {
      GibbsSampler chain(spec.model, w, bc, spec.sampler, seeds[c]);
      chain.run(spec.snapshots, [&](const ChainState& s) {
        counts[c].push_back(static_cast<double>(s.config.size()));
        energies[c].push_back(s.energy.area);
      });
      last[c] = chain.state().config;
      stats[c] = chain.state().stats;
    });
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      const std::string name = "snapshot_" + std::to_string(seed) + "_" + std::to_string(c) + ".txt";
      save_snapshot(run.file(name), last[c], spec.window_side);
      const Estimate n = batch_mean(counts[c]);
      const Estimate e = batch_mean(energies[c]);
      csv.row(seeds[c], spec.window_side, spec.bc, "mcmc", "N", n.value, n.std_error, n.n_samples);
      csv.row(seeds[c], spec.window_side, spec.bc, "mcmc", "density", n.value / w.volume(), n.std_error / w.volume(),
              n.n_samples);
      csv.row(seeds[c], spec.window_side, spec.bc, "mcmc", "energy", e.value, e.std_error, e.n_samples);
      for (MoveKind k : {MoveKind::Birth, MoveKind::Death, MoveKind::Translate, MoveKind::Resize}) {
        static const char* names[] = {"acceptance_birth", "acceptance_death", "acceptance_translate",
                                      "acceptance_resize"};
        const auto i = static_cast<std::size_t>(k);
        csv.row(seeds[c], spec.window_side, spec.bc, "mcmc", names[i], stats[c].acceptance(k), 0.0,
                static_cast<std::size_t>(stats[c].proposed[i]));
      }
      say(ctx, "seed " + std::to_string(seed) + " chain " + std::to_string(c) + ": mean N " + format_double(n.value));
    }
  }
  run.finish();
  return 0;
}

int cmd_pressure(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  Run run(ctx, "pressure");
  PressureRunOptions opts;
  opts.method = spec.method;
  opts.nodes = spec.nodes;
  opts.chains = spec.chains;
  opts.snapshots = spec.snapshots;
  opts.sampler = spec.sampler;
  opts.zeta_sweeps = spec.zeta_sweeps;
  opts.beta_points = spec.beta_points;
  opts.direct_samples = spec.direct_samples;
  CsvWriter csv(run.file("pressure.csv"), run.hash());
  const std::string method = method_name(spec.method);
  for (std::uint64_t seed : spec.seeds) {
    run.chains(seed, {});
    const auto table = pressure_bc_comparison(spec.model, spec.n_list, opts, seed, ctx.threads);
    for (const auto& row : table.rows) {
      const auto& e = row.estimate;
      for (const auto& w : e.warnings) warn(ctx, "n=" + std::to_string(row.n) + ": " + w);
      const std::string bc = BoundaryCondition{e.bc, nullptr}.name();
      csv.row(seed, static_cast<double>(row.n), bc, method,
              e.lower_bound_only ? "log_Z_per_volume_lower_bound" : "log_Z_per_volume", e.log_z_per_volume.value,
              e.log_z_per_volume.std_error, e.log_z_per_volume.n_samples);
    }
    for (const auto& g : table.gaps) {
      csv.row(seed, static_cast<double>(g.n), g.pair, method, "gap", g.gap.value, g.gap.std_error, g.gap.n_samples);
      say(ctx, "n=" + std::to_string(g.n) + " " + g.pair + ": " + format_double(g.gap.value) + " +- " +
                   format_double(g.gap.std_error));
    }
  }
  run.finish();
  return 0;
}

int cmd_energy_density(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  Run run(ctx, "energy-density");
  const BoundaryCondition bc = make_bc(spec);
  CsvWriter csv(run.file("energy_density.csv"), run.hash());
  for (std::uint64_t seed : spec.seeds) {
    run.chains(seed, chain_seeds(seed, spec.chains));
    const auto rows =
        energy_density_curve(spec.model, bc, spec.n_list, spec.chains, spec.snapshots, spec.sampler, seed, ctx.threads);
    for (const auto& r : rows) {
      const double n = static_cast<double>(r.n);
      csv.row(seed, n, spec.bc, "direct", "energy_density", r.direct.value, r.direct.std_error, r.direct.n_samples);
      csv.row(seed, n, spec.bc, "palm", "energy_density", r.palm.value, r.palm.std_error, r.palm.n_samples);
      csv.row(seed, n, spec.bc, "palm-direct", "z", r.z, 0.0, r.snapshots);
      say(ctx, "n=" + std::to_string(r.n) + ": direct " + format_double(r.direct.value) + ", palm " +
                   format_double(r.palm.value));
    }
  }
  run.finish();
  return 0;
}

int cmd_palm_check(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  Run run(ctx, "palm-check");
  const Window w = Window::centered(spec.model.dim, spec.window_side, true);
  CsvWriter csv(run.file("palm_check.csv"), run.hash());
  for (std::uint64_t seed : spec.seeds) {
    run.chains(seed, {});
    Rng rng = make_rng(seed);
    std::vector<double> energy, palm, z;
    long passed = 0;
    for (long k = 0; k < spec.palm_configs; ++k) {
      Configuration c(spec.model.dim);
      for (int tries = 0; tries < 2000 && static_cast<int>(c.size()) < spec.palm_points; ++tries) {
        MarkedPoint p{Point(spec.model.dim), spec.model.marks.sample(rng)};
        for (int i = 0; i < spec.model.dim; ++i) p.x[i] = w.lower()[i] + w.side() * uniform01(rng);
        if (!w.contains(p.x) || 2.0 * p.radius >= w.side()) continue;
        bool ok = true;
        for (const auto& q : c) ok = ok && w.distance(p.x, q.x) > p.radius + q.radius;
        if (ok) c.insert(p);
      }
      const auto chk = palm_energy_identity_check(c, w, spec.model, spec.sampler.quad, split_seed(seed, 1 + k));
      energy.push_back(chk.periodic_energy.value);
      palm.push_back(chk.palm_sum.value);
      z.push_back(std::abs(chk.z));
      passed += chk.pass ? 1 : 0;
    }
    const double n = spec.window_side;
    const Estimate e = mean_estimate(energy), p = mean_estimate(palm);
    const std::size_t m = energy.size();
    csv.row(seed, n, "periodic", "torus", "mean_periodic_energy", e.value, e.std_error, m);
    csv.row(seed, n, "periodic", "palm", "mean_palm_sum", p.value, p.std_error, m);
    csv.row(seed, n, "periodic", "palm-torus", "max_abs_z", *std::max_element(z.begin(), z.end()), 0.0, m);
    csv.row(seed, n, "periodic", "palm-torus", "pass_fraction", static_cast<double>(passed) / static_cast<double>(m),
            0.0, m);
    say(ctx, "seed " + std::to_string(seed) + ": " + std::to_string(passed) + "/" + std::to_string(m) + " pass");
  }
  run.finish();
  return 0;
}

int cmd_discontinuity(const RunContext& ctx) {
  const auto& spec = ctx.spec;
  Run run(ctx, "discontinuity");
  CsvWriter csv(run.file("discontinuity.csv"), run.hash());
  for (std::uint64_t seed : spec.seeds) {
    run.chains(seed, {});
    const auto rows = discontinuity_demo(spec.model.dim, spec.disc_S, spec.model.r, spec.n_list, spec.sampler.quad,
                                         1e-9, seed);
    for (const auto& r : rows) {
      const double n = static_cast<double>(r.n);
      csv.row(seed, n, "empty", "good", "energy_density", r.good_energy_density, 0.0, 1);
      csv.row(seed, n, "empty", "good", "hardcore", r.good_hardcore ? 1.0 : 0.0, 0.0, 1);
      csv.row(seed, n, "empty", "bad", "hardcore", r.bad_hardcore ? 1.0 : 0.0, 0.0, 1);
      csv.row(seed, n, "empty", "mixture", "energy_lower_bound", r.mixture_energy, 0.0, 1);
    }
  }
  run.finish();
  return 0;
}

int cmd_verify(const RunContext& ctx, const std::string& suite) {
  const std::uint64_t seed = ctx.spec.seeds.front();
  Run run(ctx, "verify " + suite);
  run.chains(seed, {});
  const auto results = run_verify(suite, ctx.spec, seed, ctx.threads);
  const std::string path = run.file("verify_" + suite + ".json");
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << verify_report_json(suite, seed, results);
  }
  bool pass = true;
  for (const auto& r : results) {
    pass = pass && r.pass;
    say(ctx, std::string(r.pass ? "PASS " : "FAIL ") + r.name + " (worst z " + format_double(r.worst()) + ", " +
                 std::to_string(r.z_scores.size()) + " cases)");
  }
  run.finish();
  return pass ? 0 : 1;
}

}  // namespace aogibbs
