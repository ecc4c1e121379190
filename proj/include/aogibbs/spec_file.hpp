#pragma once

#include "aogibbs/estimators.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace aogibbs {

/// Parse or validation failure, with the offending line (0 when not tied to a line) and field.
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string source, int line, std::string field, const std::string& what);

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::string source_;
  int line_;
  std::string field_;
};

/// One value of the key-value file. Numbers keep their source text so 64-bit seeds stay exact.
struct SpecValue {
  enum class Kind { Number, String, Bool, Array };
  Kind kind = Kind::Number;
  std::string text;
  bool flag = false;
  std::vector<SpecValue> items;
  int line = 0;
};

/// Flat TOML subset: [section] headers, key = value, '#' comments. Values are numbers, "strings",
/// true/false, or one-line arrays of those. Keys are stored as "section.key".
std::map<std::string, SpecValue> parse_key_values(const std::string& text, const std::string& source = "<spec>");

struct ExperimentSpec {
  ModelParams model;
  double window_side = 8.0;
  std::string bc = "free";  // free | periodic | fixed
  std::string bc_path;      // snapshot file for fixed
  SamplerOptions sampler;
  long snapshots = 200;
  int chains = 2;
  std::vector<std::uint64_t> seeds{1};
  std::string outputs = "out";

  std::vector<long> n_list{4, 8, 12};
  PressureMethod method = PressureMethod::ActivityIntegration;
  int nodes = 7;
  long direct_samples = 20000;
  int beta_points = 12;
  long zeta_sweeps = 2000;

  long palm_configs = 100;
  int palm_points = 5;

  double disc_S = 1.0;

  double verify_scale = 1.0;

  // Where the spec came from, for errors raised after parsing. Not part of the hash.
  std::string source = "<spec>";
  int bc_path_line = 0;
};

ExperimentSpec parse_spec(const std::string& text, const std::string& source = "<spec>");
ExperimentSpec load_spec(const std::string& path);

/// Every field except `outputs` in a fixed order, one "section.key = value" per line; independent of
/// the order of the input file. The output directory is left out so it does not change the hash.
std::string canonical_spec(const ExperimentSpec& spec);

}  // namespace aogibbs
