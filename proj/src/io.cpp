#include "aogibbs/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace aogibbs {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  double x = 0.0;
  const auto res = std::from_chars(first, s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || first == s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return x;
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string format_snapshot(const Configuration& config, double side) {
  std::ostringstream os;
  os << "d " << config.dim() << "\n";
  os << "n " << format_double(side) << "\n";
  os << "count " << config.size() << "\n";
  for (const auto& p : config) {
    for (int i = 0; i < config.dim(); ++i) os << format_double(p.x[i]) << ' ';
    os << format_double(p.radius) << "\n";
  }
  return os.str();
}

void save_snapshot(const std::string& path, const Configuration& config, double side) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot: " + path);
  out << format_snapshot(config, side);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Snapshot parse_snapshot(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(source + ":" + std::to_string(lineno) + ": " + what);
  };
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line)) fail("missing '" + key + "' header");
    ++lineno;
    std::istringstream ls(line);
    std::string k, v;
    if (!(ls >> k >> v) || k != key) fail("expected '" + key + " <value>'");
    return v;
  };
  Snapshot s;
  try {
    s.dim = std::stoi(header("d"));
    check_dim(s.dim);
    s.side = parse_double(header("n"));
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  const long count = std::stol(header("count"));
  if (count < 0) fail("negative count");
  s.config = Configuration(s.dim);
  for (long k = 0; k < count; ++k) {
    if (!std::getline(in, line)) fail("expected " + std::to_string(count) + " points, got " + std::to_string(k));
    ++lineno;
    std::istringstream ls(line);
    std::vector<double> v;
    std::string tok;
    try {
      while (ls >> tok) v.push_back(parse_double(tok));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (static_cast<int>(v.size()) != s.dim + 1) fail("expected " + std::to_string(s.dim + 1) + " numbers");
    MarkedPoint p{Point(s.dim), v.back()};
    for (int i = 0; i < s.dim; ++i) p.x[i] = v[i];
    try {
      if (!s.config.insert(p)) fail("duplicate position");
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return s;
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read snapshot: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_snapshot(os.str(), path);
}

CsvWriter::CsvWriter(const std::string& path, const std::string& manifest_hash)
    : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  out_ << "# schema: " << kCsvSchema << "\n";
  out_ << "# manifest: " << manifest_hash << "\n";
  out_ << "seed,n,bc,method,quantity,estimate,stderr,n_samples\n";
}

void CsvWriter::row(std::uint64_t seed, double n, const std::string& bc, const std::string& method,
                    const std::string& quantity, double estimate, double stderr_, std::size_t n_samples) {
  out_ << seed << ',' << format_double(n) << ',' << bc << ',' << method << ',' << quantity << ','
       << format_double(estimate) << ',' << format_double(stderr_) << ',' << n_samples << "\n";
  if (!out_) throw std::runtime_error("write failed: " + path_);
}

}  // namespace aogibbs
