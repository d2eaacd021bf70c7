#include "mgfem/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mgfem/backend.hpp"
#include "mgfem/io.hpp"

namespace mgfem {

std::string to_string(Problem p) {
  switch (p) {
    case Problem::transport_diffusion: return "transport-diffusion";
    case Problem::elasticity: return "elasticity";
    case Problem::driven_cavity: return "driven-cavity";
  }
  return "?";
}

Problem parse_problem(const std::string& s) {
  for (Problem p : {Problem::transport_diffusion, Problem::elasticity, Problem::driven_cavity})
    if (to_string(p) == s) return p;
  throw Error("unknown problem '" + s + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw Error("expected a number, got '" + s + "'");
  return v;
}

long long to_integer(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw Error("expected an integer, got '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const long long v = to_integer(s);
  if (v < -1000000000LL || v > 1000000000LL) throw Error("integer out of range: '" + s + "'");
  return static_cast<int>(v);
}

template <std::size_t N, class T>
std::array<T, N> to_list(const std::string& s, T (*conv)(const std::string&)) {
  std::array<T, N> out{};
  std::size_t k = 0, start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    const std::string item = trim(std::string_view(s).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (k >= N) throw Error("expected " + std::to_string(N) + " comma-separated values, got '" + s + "'");
    out[k++] = conv(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (k != N) throw Error("expected " + std::to_string(N) + " comma-separated values, got '" + s + "'");
  return out;
}

Index to_index(const std::string& s) { return static_cast<Index>(to_integer(s)); }

template <class A>
std::string join(const A& a) {
  std::string out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k) out += ',';
    if constexpr (std::is_floating_point_v<typename A::value_type>) out += format_double(a[k]);
    else out += std::to_string(a[k]);
  }
  return out;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MGFEM_DOUBLE(key, field) \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = to_double(v); }, \
      [](const RunConfig& c) { return format_double(c.field); }}
#define MGFEM_INT(key, field) \
  Key{key, [](RunConfig& c, const std::string& v) { c.field = to_int(v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      Key{"problem", [](RunConfig& c, const std::string& v) { c.problem = parse_problem(v); },
          [](const RunConfig& c) { return to_string(c.problem); }},
      Key{"backend", [](RunConfig& c, const std::string& v) { c.backend = v; },
          [](const RunConfig& c) { return c.backend; }},
      Key{"output.dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; },
          [](const RunConfig& c) { return c.output_dir; }},
      MGFEM_INT("output.snapshot_stride", snapshot_stride),
      MGFEM_DOUBLE("td.lambda", td.lambda),
      Key{"td.b", [](RunConfig& c, const std::string& v) { c.td.b = to_list<2>(v, to_double); },
          [](const RunConfig& c) { return join(c.td.b); }},
      MGFEM_DOUBLE("td.dt", td.dt),
      MGFEM_DOUBLE("td.T", td.T),
      MGFEM_INT("td.level", td.level),
      MGFEM_DOUBLE("elasticity.lambda", elasticity.lambda_lame),
      MGFEM_DOUBLE("elasticity.mu", elasticity.mu_lame),
      Key{"elasticity.f", [](RunConfig& c, const std::string& v) { c.elasticity.f = to_list<3>(v, to_double); },
          [](const RunConfig& c) { return join(c.elasticity.f); }},
      MGFEM_DOUBLE("elasticity.dt", elasticity.dt),
      MGFEM_DOUBLE("elasticity.T", elasticity.T),
      Key{"elasticity.pattern",
          [](RunConfig& c, const std::string& v) { c.elasticity.pattern = parse_refine_pattern(v); },
          [](const RunConfig& c) { return to_string(c.elasticity.pattern); }},
      MGFEM_INT("elasticity.levels", elasticity.levels),
      MGFEM_DOUBLE("ns.re", ns.re),
      MGFEM_DOUBLE("ns.dt", ns.dt),
      MGFEM_DOUBLE("ns.T", ns.T),
      Key{"ns.cells", [](RunConfig& c, const std::string& v) { c.ns.cells = to_list<3>(v, to_index); },
          [](const RunConfig& c) { return join(c.ns.cells); }},
      Key{"ns.lid", [](RunConfig& c, const std::string& v) { c.ns.lid = to_list<3>(v, to_double); },
          [](const RunConfig& c) { return join(c.ns.lid); }},
      MGFEM_INT("mg.nu_pre", solver.mg.nu_pre),
      MGFEM_INT("mg.nu_post", solver.mg.nu_post),
      MGFEM_DOUBLE("mg.omega", solver.mg.omega),
      MGFEM_INT("mg.coarse_sweeps", solver.mg.coarse_sweeps),
      MGFEM_INT("mg.max_cycles", solver.mg.max_cycles),
      MGFEM_DOUBLE("mg.rel_tol", solver.mg.rel_tol),
      Key{"mg.coarse_target", [](RunConfig& c, const std::string& v) { c.solver.mg.coarse_target = to_index(v); },
          [](const RunConfig& c) { return std::to_string(c.solver.mg.coarse_target); }},
      MGFEM_INT("gmres.max_krylov", solver.gmres.max_krylov),
      MGFEM_DOUBLE("gmres.rel_tol", solver.gmres.rel_tol),
      MGFEM_DOUBLE("gmres.abs_tol", solver.gmres.abs_tol),
  };
  return k;
}

#undef MGFEM_DOUBLE
#undef MGFEM_INT

const Key& find_key(const std::string& name) {
  for (const auto& k : keys())
    if (k.name == name) return k;
  throw ConfigError("unknown key '" + name + "'", name, 0);
}

// Longest key named at the start of a validation message.
std::string key_in_message(const std::string& msg) {
  std::string best;
  for (const auto& k : keys())
    if (msg.rfind(k.name, 0) == 0 && k.name.size() > best.size()) best = k.name;
  return best;
}

}  // namespace

void RunConfig::validate() const {
  td.validate();
  elasticity.validate();
  ns.validate();
  solver.mg.validate();
  solver.gmres.validate();
  if (snapshot_stride < 0) throw Error("output.snapshot_stride must be >= 0");
  if (output_dir.empty()) throw Error("output.dir must not be empty");
  const auto names = available_backends();
  if (std::find(names.begin(), names.end(), backend) == names.end())
    throw Error("backend '" + backend + "' is not available");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.push_back(k.name);
  return out;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  const Key& k = find_key(key);
  try {
    k.set(cfg, value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("key '" + key + "': " + e.what(), key, 0);
  }
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(std::string_view(raw).substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = "line " + std::to_string(line) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value", trim(s), line);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key", key, line);
    if (seen.count(key))
      throw ConfigError(where + "key '" + key + "' already set on line " + std::to_string(seen[key]), key, line);
    seen[key] = line;
    try {
      set_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what(), key, line);
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    const std::string key = key_in_message(e.what());
    const auto it = seen.find(key);
    const int at = it == seen.end() ? 0 : it->second;
    throw ConfigError((at ? "line " + std::to_string(at) + ": " : std::string()) + e.what(), key, at);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config '" + path.string() + "'", "", 0);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

}  // namespace mgfem
