#include "aogibbs/commands.hpp"
#include "aogibbs/hamiltonian.hpp"
#include "aogibbs/io.hpp"
#include "aogibbs/spec_file.hpp"
#include "aogibbs/verify.hpp"
#include "support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace aogibbs;
namespace fs = std::filesystem;

namespace {

const char* kSpec = R"(seeds = [7, 18446744073709551615]

[model]
dim = 2
z = 0.5
beta = 1
r = 0.1
marks = "uniform"
radius_min = 0.2
radius_max = 0.4

[window]
side = 5

[bc]
kind = "periodic"

[sampler]
snapshots = 20
chains = 2
burn_in = 20
thin = 2
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("aogibbs_test_" + name);
  fs::remove_all(p);
  return p;
}

// Parses the text and returns the error it raises; fails the test if none.
SpecError spec_error(const std::string& text) {
  try {
    parse_spec(text, "t.toml");
  } catch (const SpecError& e) {
    return e;
  }
  FAIL("expected a spec error");
  return SpecError("", 0, "", "");
}

}  // namespace

TEST_CASE("doubles round-trip through text") {
  Rng rng = make_rng(3);
  std::vector<double> xs{0.0, -0.0, 1.0, 0.1, 1e-310, std::numeric_limits<double>::max(),
                         std::numeric_limits<double>::min(), -2.5e-17};
  for (int i = 0; i < 2000; ++i) {
    std::uint64_t bits = rng();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    if (std::isfinite(x)) xs.push_back(x);
  }
  for (double x : xs) {
    const double y = parse_double(format_double(x));
    CHECK(std::memcmp(&x, &y, sizeof x) == 0);
  }
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
  CHECK_THROWS(parse_double("1.0x"));
}

TEST_CASE("sha256 matches the standard test vector") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("spec parsing") {
  const ExperimentSpec s = parse_spec(kSpec);
  REQUIRE(s.seeds.size() == 2);
  CHECK(s.seeds[1] == 18446744073709551615ull);
  CHECK(s.model.dim == 2);
  CHECK(s.window_side == 5.0);
  CHECK(s.bc == "periodic");
  CHECK(s.chains == 2);

  SUBCASE("unknown field") {
    const auto e = spec_error(std::string(kSpec) + "colour = 3\n");
    CHECK(e.field() == "sampler.colour");
    CHECK(e.line() == 23);
    CHECK(e.source() == "t.toml");
  }
  SUBCASE("duplicate key") {
    const auto e = spec_error(std::string(kSpec) + "thin = 3\n");
    CHECK(e.field() == "sampler.thin");
    CHECK(e.line() == 23);
  }
  SUBCASE("wrong type") {
    std::string t = kSpec;
    t.replace(t.find("side = 5"), 8, "side = \"five\"");
    const auto e = spec_error(t);
    CHECK(e.field() == "window.side");
    CHECK(e.line() == 13);
  }
  SUBCASE("missing mark argument") {
    std::string t = kSpec;
    t.replace(t.find("radius_max = 0.4\n"), 17, "");
    const auto e = spec_error(t);
    CHECK(e.field() == "model.radius_max");
  }
  SUBCASE("argument of another mark law") {
    const auto e = spec_error("[model]\nmarks = \"dirac\"\nradius = 0.3\nshape = 2\n");
    CHECK(e.field() == "model.shape");
    CHECK(e.line() == 4);
  }
  SUBCASE("periodic window too small") {
    std::string t = kSpec;
    t.replace(t.find("side = 5"), 8, "side = 0.9");
    CHECK(spec_error(t).field() == "window.side");
  }
  SUBCASE("seed out of range") {
    const auto e = spec_error("seeds = [18446744073709551616]\n");
    CHECK(e.field() == "seeds");
    CHECK(e.line() == 1);
  }
  SUBCASE("fixed needs a path") {
    std::string t = kSpec;
    t.replace(t.find("\"periodic\""), 10, "\"fixed\"");
    CHECK(spec_error(t).field() == "bc.path");
  }
  SUBCASE("malformed line") {
    const auto e = spec_error("[model]\ndim 2\n");
    CHECK(e.line() == 2);
  }
}

TEST_CASE("spec hash ignores order, comments and the output directory") {
  const std::string reordered = R"(# same experiment
outputs = "elsewhere"
seeds = [7, 18446744073709551615]

[sampler]
thin = 2
burn_in = 20
chains = 2
snapshots = 20

[bc]
kind = "periodic"

[window]
side = 5.0

[model]
radius_max = 0.4
radius_min = 0.2
marks = "uniform"
r = 0.1
beta = 1.0
z = 0.5
dim = 2
)";
  CHECK(spec_hash(parse_spec(kSpec)) == spec_hash(parse_spec(reordered)));
  std::string changed = kSpec;
  changed.replace(changed.find("z = 0.5"), 7, "z = 0.6");
  CHECK(spec_hash(parse_spec(kSpec)) != spec_hash(parse_spec(changed)));
}

TEST_CASE("snapshots round-trip exactly and load as a fixed boundary") {
  Rng rng = make_rng(11);
  const Window w = Window::centered(2, 6.0);
  const Configuration c = testing_support::random_hardcore(w, 25, 0.1, 0.4, rng);
  const Snapshot s = parse_snapshot(format_snapshot(c, 6.0));
  CHECK(s.dim == 2);
  CHECK(s.side == 6.0);
  REQUIRE(s.config.size() == c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(s.config[i].radius == c[i].radius);
    CHECK(s.config[i].x[0] == c[i].x[0]);
    CHECK(s.config[i].x[1] == c[i].x[1]);
  }
  CHECK(format_snapshot(s.config, s.side) == format_snapshot(c, 6.0));

  const fs::path dir = fresh_dir("snapshot");
  fs::create_directories(dir);
  save_snapshot((dir / "s.txt").string(), c, 6.0);
  const Snapshot loaded = load_snapshot((dir / "s.txt").string());
  const BoundaryCondition a = BoundaryCondition::fixed(c), b = BoundaryCondition::fixed(loaded.config);
  const Window inner = Window::centered(2, 3.0);
  const Configuration in = restrict(c, inner);
  CHECK(area_energy(in, inner, a, 0.2, {}, rng).value == area_energy(in, inner, b, 0.2, {}, rng).value);

  CHECK_THROWS_AS(parse_snapshot("d 2\nn 6\ncount 2\n0 0 0.1\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_snapshot("d 2\nn 6\ncount 2\n0 0 0.1\n0 0 0.2\n"), std::runtime_error);
}

TEST_CASE("command outputs are byte-identical per seed") {
  ExperimentSpec spec = parse_spec(kSpec);
  auto run = [&](const std::string& name) {
    RunContext ctx{spec, fresh_dir(name).string(), 2, true, nullptr};
    CHECK(cmd_sample(ctx) == 0);
    return fs::path(ctx.out_dir);
  };
  const fs::path a = run("det_a"), b = run("det_b");
  for (const char* f : {"sample.csv", "snapshot_7_0.txt", "snapshot_7_1.txt", "snapshot_18446744073709551615_1.txt"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
  }
  const std::string csv = slurp(a / "sample.csv");
  CHECK(csv.rfind("# schema: ao-gibbs-csv v1\n# manifest: " + spec_hash(spec) + "\n", 0) == 0);
  CHECK(csv.find("seed,n,bc,method,quantity,estimate,stderr,n_samples\n") != std::string::npos);

  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["spec_hash"] == spec_hash(spec));
  CHECK(m["seeds"][1].get<std::uint64_t>() == 18446744073709551615ull);
  CHECK(m["chain_seeds"][0]["chains"].size() == 2);
  CHECK(m.contains("started"));
  CHECK(m["outputs"].size() == 5);

  // A sampled snapshot drives a fixed-boundary run on a smaller window.
  const Snapshot snap = load_snapshot((a / "snapshot_7_0.txt").string());
  CHECK(snap.side == 5.0);
  spec.bc = "fixed";
  spec.bc_path = (a / "snapshot_7_0.txt").string();
  spec.window_side = 3.0;
  RunContext fixed{spec, fresh_dir("fixed").string(), 1, true, nullptr};
  CHECK(cmd_sample(fixed) == 0);
  CHECK(slurp(fs::path(fixed.out_dir) / "sample.csv").find(",fixed,") != std::string::npos);
}

TEST_CASE("verify reports are deterministic") {
  ExperimentSpec spec = parse_spec(kSpec);
  spec.verify_scale = 0.05;
  const auto r1 = run_verify("geometry", spec, 5);
  const auto r2 = run_verify("geometry", spec, 5, 3);
  const std::string j1 = verify_report_json("geometry", 5, r1);
  CHECK(j1 == verify_report_json("geometry", 5, r2));
  const auto j = nlohmann::json::parse(j1);
  CHECK(j["schema"] == "ao-gibbs-verify v1");
  for (const auto& c : j["checks"]) CHECK(c.contains("z_scores"));
  CHECK_THROWS_AS(run_verify("nonsense", spec, 5), std::invalid_argument);
}

TEST_CASE("family-wise threshold") {
  CHECK(family_threshold(1) == doctest::Approx(3.2905).epsilon(1e-4));
  CHECK(family_threshold(100) > family_threshold(10));
  CheckResult c;
  c.z_scores = {0.5, -3.2};
  set_threshold(c, 3.0);
  CHECK_FALSE(c.pass);
  set_threshold(c, 3.5);
  CHECK(c.pass);
}
