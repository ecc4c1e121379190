#pragma once

#include "aogibbs/spec_file.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aogibbs {

std::string code_version();

/// SHA-256 of the canonical spec text.
std::string spec_hash(const ExperimentSpec& spec);

struct RunManifest {
  std::string command;
  std::string spec_hash;
  std::string code_version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::uint64_t, std::vector<std::uint64_t>>> chain_seeds;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);

struct RunContext {
  ExperimentSpec spec;
  std::string out_dir;
  int threads = 1;
  bool quiet = false;
  std::ostream* log = nullptr;  // progress and warnings; nullptr for none
};

/// Each command writes its CSV (and snapshots for `sample`) plus manifest.json into ctx.out_dir and
/// returns the process exit code. Errors are thrown (SpecError for inputs, std::runtime_error for I/O).
int cmd_sample(const RunContext& ctx);
int cmd_pressure(const RunContext& ctx);
int cmd_energy_density(const RunContext& ctx);
int cmd_palm_check(const RunContext& ctx);
int cmd_discontinuity(const RunContext& ctx);
/// Exit 0 when every check passes, 1 otherwise. Writes verify_<suite>.json.
int cmd_verify(const RunContext& ctx, const std::string& suite);

}  // namespace aogibbs
