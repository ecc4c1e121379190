#include "aogibbs/spec_file.hpp"

#include "aogibbs/io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace aogibbs {

SpecError::SpecError(std::string source, int line, std::string field, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         (field.empty() ? std::string() : ": field '" + field + "'") + ": " + what),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

// Cuts a trailing comment, ignoring '#' inside strings.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && in_str) {
      ++i;
    } else if (s[i] == '"') {
      in_str = !in_str;
    } else if (s[i] == '#' && !in_str) {
      return s.substr(0, i);
    }
  }
  return s;
}

class ValueParser {
 public:
  ValueParser(const std::string& text, int line, std::function<void(const std::string&)> fail)
      : s_(text), line_(line), fail_(std::move(fail)) {}

  SpecValue parse_all() {
    SpecValue v = parse_value(true);
    skip_ws();
    if (pos_ != s_.size()) fail_("unexpected text after value: '" + s_.substr(pos_) + "'");
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  SpecValue parse_value(bool allow_array) {
    skip_ws();
    if (pos_ >= s_.size()) fail_("missing value");
    SpecValue v;
    v.line = line_;
    const char c = s_[pos_];
    if (c == '"') {
      v.kind = SpecValue::Kind::String;
      ++pos_;
      while (true) {
        if (pos_ >= s_.size()) fail_("unterminated string");
        const char ch = s_[pos_++];
        if (ch == '"') break;
        if (ch == '\\') {
          if (pos_ >= s_.size()) fail_("unterminated string");
          const char e = s_[pos_++];
          if (e == 'n') v.text += '\n';
          else if (e == 't') v.text += '\t';
          else if (e == '"' || e == '\\') v.text += e;
          else fail_(std::string("unknown escape '\\") + e + "'");
        } else {
          v.text += ch;
        }
      }
      return v;
    }
    if (c == '[') {
      if (!allow_array) fail_("nested arrays are not supported");
      v.kind = SpecValue::Kind::Array;
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.items.push_back(parse_value(false));
        skip_ws();
        if (pos_ >= s_.size()) fail_("unterminated array");
        if (s_[pos_] == ',') {
          ++pos_;
          skip_ws();
          if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (s_[pos_] == ']') {
          ++pos_;
          return v;
        }
        fail_("expected ',' or ']' in array");
      }
    }
    const auto start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != ' ' && s_[pos_] != '\t') ++pos_;
    const std::string tok = s_.substr(start, pos_ - start);
    if (tok == "true" || tok == "false") {
      v.kind = SpecValue::Kind::Bool;
      v.flag = tok == "true";
      v.text = tok;
      return v;
    }
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits += ch;
    }
    try {
      parse_double(digits);
    } catch (const std::invalid_argument&) {
      fail_("not a number, string, boolean or array: '" + tok + "'");
    }
    v.kind = SpecValue::Kind::Number;
    v.text = digits;
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_;
  std::function<void(const std::string&)> fail_;
};

const char* kind_name(SpecValue::Kind k) {
  switch (k) {
    case SpecValue::Kind::Number: return "number";
    case SpecValue::Kind::String: return "string";
    case SpecValue::Kind::Bool: return "boolean";
    case SpecValue::Kind::Array: return "array";
  }
  return "?";
}

struct Binder {
  std::string source;
  std::string key;
  const SpecValue* value = nullptr;

  [[noreturn]] void fail(const std::string& what) const { throw SpecError(source, value->line, key, what); }

  void expect(const SpecValue& v, SpecValue::Kind k) const {
    if (v.kind != k) fail(std::string("expected a ") + kind_name(k) + ", got a " + kind_name(v.kind));
  }

  double number(const SpecValue& v) const {
    expect(v, SpecValue::Kind::Number);
    const double x = parse_double(v.text);
    if (!std::isfinite(x)) fail("must be finite");
    return x;
  }
  double number() const { return number(*value); }
  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail("must be > 0");
    return x;
  }
  double nonnegative() const {
    const double x = number();
    if (!(x >= 0.0)) fail("must be >= 0");
    return x;
  }
  long integer(const SpecValue& v, long lo) const {
    expect(v, SpecValue::Kind::Number);
    long x = 0;
    const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
    if (res.ec != std::errc() || res.ptr != v.text.data() + v.text.size()) fail("expected an integer, got '" + v.text + "'");
    if (x < lo) fail("must be >= " + std::to_string(lo));
    return x;
  }
  long integer(long lo) const { return integer(*value, lo); }
  std::uint64_t seed(const SpecValue& v) const {
    expect(v, SpecValue::Kind::Number);
    std::uint64_t x = 0;
    const auto res = std::from_chars(v.text.data(), v.text.data() + v.text.size(), x);
    if (res.ec != std::errc() || res.ptr != v.text.data() + v.text.size()) {
      fail("seeds must be unsigned 64-bit integers, got '" + v.text + "'");
    }
    return x;
  }
  std::string string() const {
    expect(*value, SpecValue::Kind::String);
    return value->text;
  }
  bool boolean() const {
    expect(*value, SpecValue::Kind::Bool);
    return value->flag;
  }
  std::vector<SpecValue> list() const {
    if (value->kind == SpecValue::Kind::Array) {
      if (value->items.empty()) fail("must not be empty");
      return value->items;
    }
    return {*value};
  }
};

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == '\t') {
      out += "\\t";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

std::string mark_kind_name(MarkLaw::Kind k) {
  switch (k) {
    case MarkLaw::Kind::Dirac: return "dirac";
    case MarkLaw::Kind::Uniform: return "uniform";
    case MarkLaw::Kind::TruncatedWeibull: return "weibull";
  }
  return "?";
}

}  // namespace

std::map<std::string, SpecValue> parse_key_values(const std::string& text, const std::string& source) {
  std::map<std::string, SpecValue> out;
  std::set<std::string> sections;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw SpecError(source, lineno, "", "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) throw SpecError(source, lineno, section, "invalid section name");
      if (!sections.insert(section).second) throw SpecError(source, lineno, section, "duplicate section");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SpecError(source, lineno, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    if (!valid_key(key)) throw SpecError(source, lineno, full, "invalid key");
    const std::string rhs = trim(line.substr(eq + 1));
    ValueParser vp(rhs, lineno, [&](const std::string& what) { throw SpecError(source, lineno, full, what); });
    SpecValue v = vp.parse_all();
    if (out.count(full)) {
      throw SpecError(source, lineno, full, "duplicate key (first set on line " + std::to_string(out[full].line) + ")");
    }
    out.emplace(full, std::move(v));
  }
  return out;
}

ExperimentSpec parse_spec(const std::string& text, const std::string& source) {
  const auto kv = parse_key_values(text, source);
  ExperimentSpec spec;

  // Mark law fields are gathered first and assembled after the loop.
  std::string marks = "dirac";
  std::map<std::string, double> mark_args;
  int marks_line = 0;

  using Handler = std::function<void(const Binder&)>;
  const std::map<std::string, Handler> handlers{
      {"model.dim", [&](const Binder& b) {
         spec.model.dim = static_cast<int>(b.integer(1));
         if (spec.model.dim > 3) b.fail("must be 1, 2 or 3");
       }},
      {"model.z", [&](const Binder& b) { spec.model.z = b.positive(); }},
      {"model.beta", [&](const Binder& b) { spec.model.beta = b.positive(); }},
      {"model.r", [&](const Binder& b) { spec.model.r = b.positive(); }},
      {"model.marks", [&](const Binder& b) {
         marks = b.string();
         marks_line = b.value->line;
         if (marks != "dirac" && marks != "uniform" && marks != "weibull") {
           b.fail("expected \"dirac\", \"uniform\" or \"weibull\", got \"" + marks + "\"");
         }
       }},
      {"model.radius", [&](const Binder& b) { mark_args["radius"] = b.nonnegative(); }},
      {"model.radius_min", [&](const Binder& b) { mark_args["radius_min"] = b.nonnegative(); }},
      {"model.radius_max", [&](const Binder& b) { mark_args["radius_max"] = b.positive(); }},
      {"model.scale", [&](const Binder& b) { mark_args["scale"] = b.positive(); }},
      {"model.shape", [&](const Binder& b) { mark_args["shape"] = b.positive(); }},
      {"model.cutoff", [&](const Binder& b) { mark_args["cutoff"] = b.positive(); }},
      {"model.delta", [&](const Binder& b) { mark_args["delta"] = b.positive(); }},

      {"window.side", [&](const Binder& b) { spec.window_side = b.positive(); }},

      {"bc.kind", [&](const Binder& b) {
         spec.bc = b.string();
         if (spec.bc != "free" && spec.bc != "periodic" && spec.bc != "fixed") {
           b.fail("expected \"free\", \"periodic\" or \"fixed\", got \"" + spec.bc + "\"");
         }
       }},
      {"bc.path", [&](const Binder& b) { spec.bc_path = b.string(); }},

      {"sampler.burn_in", [&](const Binder& b) { spec.sampler.burn_in = b.integer(0); }},
      {"sampler.thin", [&](const Binder& b) { spec.sampler.thin = b.integer(1); }},
      {"sampler.snapshots", [&](const Binder& b) { spec.snapshots = b.integer(1); }},
      {"sampler.chains", [&](const Binder& b) { spec.chains = static_cast<int>(b.integer(1)); }},
      {"sampler.translate_step", [&](const Binder& b) { spec.sampler.translate_step = b.positive(); }},
      {"sampler.audit_every", [&](const Binder& b) { spec.sampler.audit_every = b.integer(0); }},
      {"sampler.birth", [&](const Binder& b) { spec.sampler.mix.birth = b.nonnegative(); }},
      {"sampler.death", [&](const Binder& b) { spec.sampler.mix.death = b.nonnegative(); }},
      {"sampler.translate", [&](const Binder& b) { spec.sampler.mix.translate = b.nonnegative(); }},
      {"sampler.resize", [&](const Binder& b) { spec.sampler.mix.resize = b.nonnegative(); }},
      {"sampler.gamma", [&](const Binder& b) { spec.sampler.gamma = b.positive(); }},

      {"quadrature.points_per_unit_volume",
       [&](const Binder& b) { spec.sampler.quad.points_per_unit_volume = b.positive(); }},
      {"quadrature.scheme", [&](const Binder& b) {
         const auto s = b.string();
         if (s == "lattice") spec.sampler.quad.scheme = QuadratureScheme::LatticeShift;
         else if (s == "stratified") spec.sampler.quad.scheme = QuadratureScheme::Stratified;
         else b.fail("expected \"lattice\" or \"stratified\", got \"" + s + "\"");
       }},
      {"quadrature.target_rel_error", [&](const Binder& b) { spec.sampler.quad.target_rel_error = b.positive(); }},
      {"quadrature.replicates", [&](const Binder& b) { spec.sampler.quad.replicates = static_cast<int>(b.integer(2)); }},
      {"quadrature.min_points_per_axis",
       [&](const Binder& b) { spec.sampler.quad.min_points_per_axis = static_cast<int>(b.integer(1)); }},
      {"quadrature.adaptive", [&](const Binder& b) { spec.sampler.quad.adaptive = b.boolean(); }},
      {"quadrature.max_doublings", [&](const Binder& b) { spec.sampler.quad.max_doublings = static_cast<int>(b.integer(0)); }},
      {"quadrature.exact", [&](const Binder& b) { spec.sampler.quad.exact_when_available = b.boolean(); }},

      {"seeds", [&](const Binder& b) {
         spec.seeds.clear();
         for (const auto& v : b.list()) spec.seeds.push_back(b.seed(v));
       }},
      {"outputs", [&](const Binder& b) {
         spec.outputs = b.string();
         if (spec.outputs.empty()) b.fail("must not be empty");
       }},

      {"pressure.n_list", [&](const Binder& b) {
         spec.n_list.clear();
         for (const auto& v : b.list()) spec.n_list.push_back(b.integer(v, 1));
       }},
      {"pressure.method", [&](const Binder& b) {
         const auto s = b.string();
         if (s == "direct") spec.method = PressureMethod::Direct;
         else if (s == "thermo_integration") spec.method = PressureMethod::ThermoIntegration;
         else if (s == "activity_integration") spec.method = PressureMethod::ActivityIntegration;
         else b.fail("expected \"direct\", \"thermo_integration\" or \"activity_integration\", got \"" + s + "\"");
       }},
      {"pressure.nodes", [&](const Binder& b) {
         spec.nodes = static_cast<int>(b.integer(1));
         if (spec.nodes != 7 && spec.nodes != 10 && spec.nodes != 15 && spec.nodes != 20) b.fail("must be 7, 10, 15 or 20");
       }},
      {"pressure.direct_samples", [&](const Binder& b) { spec.direct_samples = b.integer(1); }},
      {"pressure.beta_points", [&](const Binder& b) { spec.beta_points = static_cast<int>(b.integer(2)); }},
      {"pressure.zeta_sweeps", [&](const Binder& b) { spec.zeta_sweeps = b.integer(0); }},

      {"palm.configs", [&](const Binder& b) { spec.palm_configs = b.integer(1); }},
      {"palm.points", [&](const Binder& b) { spec.palm_points = static_cast<int>(b.integer(1)); }},

      {"discontinuity.S", [&](const Binder& b) { spec.disc_S = b.positive(); }},

      {"verify.scale", [&](const Binder& b) { spec.verify_scale = b.positive(); }},
  };

  for (const auto& [key, value] : kv) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw SpecError(source, value.line, key, "unknown field");
    Binder b{source, key, &value};
    it->second(b);
  }

  auto line_of = [&](const std::string& key) {
    const auto it = kv.find(key);
    return it == kv.end() ? 0 : it->second.line;
  };
  auto need = [&](const std::string& arg) {
    const auto it = mark_args.find(arg);
    if (it == mark_args.end()) {
      throw SpecError(source, marks_line, "model." + arg, "required for marks = \"" + marks + "\"");
    }
    return it->second;
  };
  const std::map<std::string, std::set<std::string>> allowed{
      {"dirac", {"radius", "delta"}},
      {"uniform", {"radius_min", "radius_max", "delta"}},
      {"weibull", {"scale", "shape", "cutoff", "delta"}},
  };
  for (const auto& [arg, _] : mark_args) {
    if (!allowed.at(marks).count(arg)) {
      throw SpecError(source, line_of("model." + arg), "model." + arg, "not used by marks = \"" + marks + "\"");
    }
  }
  const double delta = mark_args.count("delta") ? mark_args["delta"] : 1.0;
  try {
    if (marks == "dirac") {
      spec.model.marks = MarkLaw::dirac(mark_args.count("radius") ? mark_args["radius"] : 0.5, delta);
    } else if (marks == "uniform") {
      spec.model.marks = MarkLaw::uniform(need("radius_min"), need("radius_max"), delta);
    } else {
      spec.model.marks = MarkLaw::truncated_weibull(need("scale"), need("shape"), need("cutoff"), delta);
    }
  } catch (const std::invalid_argument& e) {
    throw SpecError(source, marks_line, "model.marks", e.what());
  }

  try {
    spec.sampler.mix.validate();
  } catch (const std::invalid_argument& e) {
    throw SpecError(source, line_of("sampler.birth"), "sampler.birth", e.what());
  }
  if (spec.sampler.gamma) {
    try {
      TemperednessEnvelope::for_params(spec.model, spec.sampler.gamma);
    } catch (const std::invalid_argument& e) {
      throw SpecError(source, line_of("sampler.gamma"), "sampler.gamma", e.what());
    }
  }
  if (spec.bc == "fixed" && spec.bc_path.empty()) {
    throw SpecError(source, line_of("bc.kind"), "bc.path", "a snapshot path is required for fixed boundary conditions");
  }
  if (spec.bc != "fixed" && !spec.bc_path.empty()) {
    throw SpecError(source, line_of("bc.path"), "bc.path", "only used with kind = \"fixed\"");
  }
  if (spec.bc == "periodic" && 2.0 * (spec.model.marks.max_radius() + spec.model.r) > spec.window_side) {
    throw SpecError(source, line_of("window.side"), "window.side",
                    "periodic window must be at least 2 (max radius + r) wide");
  }
  spec.source = source;
  spec.bc_path_line = line_of("bc.path");
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError(path, 0, "", "cannot read file");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_spec(os.str(), path);
}

std::string canonical_spec(const ExperimentSpec& s) {
  std::ostringstream os;
  auto num = [&](const char* k, double v) { os << k << " = " << format_double(v) << "\n"; };
  auto integer = [&](const char* k, long v) { os << k << " = " << v << "\n"; };
  auto str = [&](const char* k, const std::string& v) { os << k << " = " << quote(v) << "\n"; };
  auto flag = [&](const char* k, bool v) { os << k << " = " << (v ? "true" : "false") << "\n"; };

  integer("model.dim", s.model.dim);
  num("model.z", s.model.z);
  num("model.beta", s.model.beta);
  num("model.r", s.model.r);
  const auto& m = s.model.marks;
  str("model.marks", mark_kind_name(m.kind()));
  switch (m.kind()) {
    case MarkLaw::Kind::Dirac:
      num("model.radius", m.param_a());
      break;
    case MarkLaw::Kind::Uniform:
      num("model.radius_min", m.param_a());
      num("model.radius_max", m.param_b());
      break;
    case MarkLaw::Kind::TruncatedWeibull:
      num("model.scale", m.param_a());
      num("model.shape", m.param_b());
      num("model.cutoff", m.param_c());
      break;
  }
  num("model.delta", m.delta());
  num("window.side", s.window_side);
  str("bc.kind", s.bc);
  str("bc.path", s.bc_path);
  integer("sampler.burn_in", s.sampler.burn_in);
  integer("sampler.thin", s.sampler.thin);
  integer("sampler.snapshots", s.snapshots);
  integer("sampler.chains", s.chains);
  num("sampler.translate_step", s.sampler.translate_step);
  integer("sampler.audit_every", s.sampler.audit_every);
  num("sampler.birth", s.sampler.mix.birth);
  num("sampler.death", s.sampler.mix.death);
  num("sampler.translate", s.sampler.mix.translate);
  num("sampler.resize", s.sampler.mix.resize);
  str("sampler.gamma", s.sampler.gamma ? format_double(*s.sampler.gamma) : "default");
  const auto& q = s.sampler.quad;
  num("quadrature.points_per_unit_volume", q.points_per_unit_volume);
  str("quadrature.scheme", q.scheme == QuadratureScheme::LatticeShift ? "lattice" : "stratified");
  num("quadrature.target_rel_error", q.target_rel_error);
  integer("quadrature.replicates", q.replicates);
  integer("quadrature.min_points_per_axis", q.min_points_per_axis);
  flag("quadrature.adaptive", q.adaptive);
  integer("quadrature.max_doublings", q.max_doublings);
  flag("quadrature.exact", q.exact_when_available);
  os << "seeds = [";
  for (std::size_t i = 0; i < s.seeds.size(); ++i) os << (i ? ", " : "") << s.seeds[i];
  os << "]\n";
  os << "pressure.n_list = [";
  for (std::size_t i = 0; i < s.n_list.size(); ++i) os << (i ? ", " : "") << s.n_list[i];
  os << "]\n";
  str("pressure.method", method_name(s.method));
  integer("pressure.nodes", s.nodes);
  integer("pressure.direct_samples", s.direct_samples);
  integer("pressure.beta_points", s.beta_points);
  integer("pressure.zeta_sweeps", s.zeta_sweeps);
  integer("palm.configs", s.palm_configs);
  integer("palm.points", s.palm_points);
  num("discontinuity.S", s.disc_S);
  num("verify.scale", s.verify_scale);
  return os.str();
}

}  // namespace aogibbs
