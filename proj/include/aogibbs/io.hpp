#pragma once

#include "aogibbs/configuration.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace aogibbs {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(const std::string& s);

std::string sha256_hex(const std::string& data);

struct Snapshot {
  int dim = 2;
  double side = 0.0;
  Configuration config{2};
};

/// Text format: "d <dim>", "n <side>", "count <k>", then one "x1 .. xd R" line per point.
void save_snapshot(const std::string& path, const Configuration& config, double side);
std::string format_snapshot(const Configuration& config, double side);
Snapshot load_snapshot(const std::string& path);
Snapshot parse_snapshot(const std::string& text, const std::string& source = "<snapshot>");

inline constexpr const char* kCsvSchema = "ao-gibbs-csv v1";

/// Rows of seed, n, bc, method, quantity, estimate, stderr, n_samples behind two '#' lines
/// carrying the schema version and the manifest hash.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& manifest_hash);

  void row(std::uint64_t seed, double n, const std::string& bc, const std::string& method,
           const std::string& quantity, double estimate, double stderr_, std::size_t n_samples);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace aogibbs
