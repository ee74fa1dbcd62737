#include "preytaxis/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace preytaxis::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(const IniEntry& e) {
  return "line " + std::to_string(e.line) + " ([" + e.section + "] " + e.key + ")";
}

double to_double(const IniEntry& e) {
  const std::string& s = e.value;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out)) {
    throw ConfigError(where(e) + ": expected a finite number, got '" + s + "'");
  }
  return out;
}

long long to_integer(const IniEntry& e) {
  const std::string& s = e.value;
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(where(e) + ": expected an integer, got '" + s + "'");
  }
  return out;
}

int to_int(const IniEntry& e) {
  const long long x = to_integer(e);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(where(e) + ": integer out of range");
  }
  return static_cast<int>(x);
}

std::uint64_t to_u64(const IniEntry& e) {
  const std::string& s = e.value;
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(where(e) + ": expected an unsigned 64-bit integer, got '" + s + "'");
  }
  return out;
}

std::vector<double> to_list(const IniEntry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    IniEntry one = e;
    one.value = trim(item);
    out.push_back(to_double(one));
  }
  return out;
}

template <typename T>
T to_enum(const IniEntry& e, const std::map<std::string, T>& names) {
  const auto it = names.find(e.value);
  if (it == names.end()) {
    std::string options;
    for (const auto& [name, value] : names) options += (options.empty() ? "" : "|") + name;
    throw ConfigError(where(e) + ": expected one of " + options + ", got '" + e.value + "'");
  }
  return it->second;
}

using Setter = std::function<void(RunConfig&, const IniEntry&)>;

const std::map<std::string, std::map<std::string, Setter>>& schema() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"model",
       {
           {"kind",
            [](RunConfig& c, const IniEntry& e) {
              c.model_kind = to_enum<KineticsKind>(
                  e, {{"lotka_volterra", KineticsKind::LotkaVolterra},
                      {"rosenzweig_macarthur", KineticsKind::RosenzweigMacArthur}});
            }},
           {"gamma", [](RunConfig& c, const IniEntry& e) { c.params.gamma = to_double(e); }},
           {"theta", [](RunConfig& c, const IniEntry& e) { c.params.theta = to_double(e); }},
           {"alpha", [](RunConfig& c, const IniEntry& e) { c.params.alpha = to_double(e); }},
           {"mu", [](RunConfig& c, const IniEntry& e) { c.params.mu = to_double(e); }},
           {"K", [](RunConfig& c, const IniEntry& e) { c.params.K = to_double(e); }},
           {"lambda", [](RunConfig& c, const IniEntry& e) { c.params.lambda = to_double(e); }},
       }},
      {"motility",
       {
           {"kind",
            [](RunConfig& c, const IniEntry& e) {
              c.motility_kind = to_enum<MotilityKind>(e, {{"d1", MotilityKind::D1},
                                                          {"d2", MotilityKind::D2},
                                                          {"d3", MotilityKind::D3},
                                                          {"constant", MotilityKind::Constant},
                                                          {"custom", MotilityKind::Custom}});
            }},
           {"d_const", [](RunConfig& c, const IniEntry& e) { c.d_const = to_double(e); }},
           {"chi_const", [](RunConfig& c, const IniEntry& e) { c.chi_const = to_double(e); }},
       }},
      {"domain",
       {
           {"length", [](RunConfig& c, const IniEntry& e) { c.length = to_double(e); }},
           {"n_cells", [](RunConfig& c, const IniEntry& e) { c.n_cells = to_int(e); }},
       }},
      {"solver",
       {
           {"scheme",
            [](RunConfig& c, const IniEntry& e) {
              c.scheme = to_enum<Scheme>(e, {{"rk4", Scheme::ExplicitRK4}, {"imex", Scheme::IMEX}});
            }},
           {"cfl_safety", [](RunConfig& c, const IniEntry& e) { c.cfl_safety = to_double(e); }},
           {"t_end", [](RunConfig& c, const IniEntry& e) { c.t_end = to_double(e); }},
           {"snapshot_count", [](RunConfig& c, const IniEntry& e) { c.snapshot_count = to_int(e); }},
           {"output_count", [](RunConfig& c, const IniEntry& e) { c.output_count = to_int(e); }},
           {"epsilon", [](RunConfig& c, const IniEntry& e) { c.epsilon = to_double(e); }},
           {"seed", [](RunConfig& c, const IniEntry& e) { c.seed = to_u64(e); }},
           {"initial",
            [](RunConfig& c, const IniEntry& e) {
              c.initial = to_enum<InitialState>(e, {{"coexistence", InitialState::Coexistence},
                                                    {"prey_only", InitialState::PreyOnly},
                                                    {"explicit", InitialState::Explicit}});
            }},
           {"u0", [](RunConfig& c, const IniEntry& e) { c.u0 = to_double(e); }},
           {"v0", [](RunConfig& c, const IniEntry& e) { c.v0 = to_double(e); }},
       }},
      {"analysis",
       {
           {"D", [](RunConfig& c, const IniEntry& e) { c.D = to_double(e); }},
           {"ell", [](RunConfig& c, const IniEntry& e) { c.ell = to_double(e); }},
           {"n_max", [](RunConfig& c, const IniEntry& e) { c.n_max = to_int(e); }},
           {"eta_min", [](RunConfig& c, const IniEntry& e) { c.eta_min = to_double(e); }},
           {"eta_max", [](RunConfig& c, const IniEntry& e) { c.eta_max = to_double(e); }},
           {"eta_count", [](RunConfig& c, const IniEntry& e) { c.eta_count = to_int(e); }},
           {"eta_spacing",
            [](RunConfig& c, const IniEntry& e) {
              c.eta_log = to_enum<bool>(e, {{"log", true}, {"linear", false}});
            }},
           {"k_max", [](RunConfig& c, const IniEntry& e) { c.k_max = to_double(e); }},
           {"k_count", [](RunConfig& c, const IniEntry& e) { c.k_count = to_int(e); }},
       }},
      {"sweep",
       {
           {"D_values", [](RunConfig& c, const IniEntry& e) { c.sweep_D = to_list(e); }},
           {"D_min", [](RunConfig& c, const IniEntry& e) { c.sweep_D_min = to_double(e); }},
           {"D_max", [](RunConfig& c, const IniEntry& e) { c.sweep_D_max = to_double(e); }},
           {"D_count", [](RunConfig& c, const IniEntry& e) { c.sweep_D_count = to_int(e); }},
           {"spacing",
            [](RunConfig& c, const IniEntry& e) {
              c.sweep_log = to_enum<bool>(e, {{"log", true}, {"linear", false}});
            }},
       }},
      {"output",
       {
           {"directory", [](RunConfig& c, const IniEntry& e) { c.directory = e.value; }},
       }},
  };
  return table;
}

}  // namespace

std::vector<IniEntry> parse_ini(std::istream& in) {
  std::vector<IniEntry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    IniEntry e{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (section.empty()) throw ConfigError(where(e) + ": key outside of any section");
    if (e.key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert({e.section, e.key}).second) throw ConfigError(where(e) + ": duplicate key");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<double> RunConfig::sweep_points() const {
  const bool has_range = sweep_D_min || sweep_D_max || sweep_D_count != 0;
  if (!sweep_D.empty() && has_range) {
    throw ConfigError("[sweep] give either D_values or D_min/D_max/D_count, not both");
  }
  if (!has_range) return sweep_D;
  if (!sweep_D_min || !sweep_D_max) throw ConfigError("[sweep] a range needs both D_min and D_max");
  std::vector<double> out;
  const int n = sweep_D_count;
  for (int j = 0; j < n; ++j) {
    const double s = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
    out.push_back(sweep_log ? *sweep_D_min * std::pow(*sweep_D_max / *sweep_D_min, s)
                            : *sweep_D_min + s * (*sweep_D_max - *sweep_D_min));
  }
  return out;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  cfg.entries = parse_ini(in);
  for (const IniEntry& e : cfg.entries) {
    const auto sec = schema().find(e.section);
    if (sec == schema().end()) throw ConfigError(where(e) + ": unknown section");
    const auto key = sec->second.find(e.key);
    if (key == sec->second.end()) throw ConfigError(where(e) + ": unknown key");
    key->second(cfg, e);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

Kinetics make_kinetics(const RunConfig& cfg) {
  switch (cfg.model_kind) {
    case KineticsKind::LotkaVolterra:
      return Kinetics::lotka_volterra(cfg.params);
    case KineticsKind::RosenzweigMacArthur:
      return Kinetics::rosenzweig_macarthur(cfg.params);
    case KineticsKind::Custom:
      break;
  }
  throw ValidationError("custom kinetics are only available through the library API");
}

Motility make_motility(const RunConfig& cfg) {
  switch (cfg.motility_kind) {
    case MotilityKind::D1:
      return Motility::d1();
    case MotilityKind::D2:
      return Motility::d2();
    case MotilityKind::D3:
      return Motility::d3();
    case MotilityKind::Constant:
      return Motility::constant(cfg.d_const, cfg.chi_const);
    case MotilityKind::Custom:
      break;
  }
  throw ValidationError("custom motility is only available through the library API");
}

Grid1D make_grid(const RunConfig& cfg) { return Grid1D(cfg.length, cfg.n_cells); }

void validate_ranges(const RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("invalid configuration: " + what);
  };
  require(cfg.D > 0.0, "[analysis] D must be > 0");
  require(!cfg.ell || *cfg.ell > 0.0, "[analysis] ell must be > 0");
  require(!cfg.n_max || *cfg.n_max >= 0, "[analysis] n_max must be >= 0");
  require(cfg.eta_min > 0.0 && cfg.eta_max > cfg.eta_min, "[analysis] need 0 < eta_min < eta_max");
  require(cfg.eta_count >= 2, "[analysis] eta_count must be >= 2");
  require(!cfg.k_max || *cfg.k_max > 0.0, "[analysis] k_max must be > 0");
  require(cfg.k_count >= 2, "[analysis] k_count must be >= 2");
  require(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0, "[solver] cfl_safety must lie in (0, 1]");
  require(cfg.t_end > 0.0, "[solver] t_end must be > 0");
  require(cfg.snapshot_count >= 2, "[solver] snapshot_count must be >= 2");
  require(cfg.output_count >= 1, "[solver] output_count must be >= 1");
  require(cfg.epsilon >= 0.0, "[solver] epsilon must be >= 0");
  require(cfg.u0 >= 0.0 && cfg.v0 >= 0.0, "[solver] u0 and v0 must be >= 0");
  for (double D : cfg.sweep_D) require(D > 0.0, "[sweep] every D must be > 0");
  require(!cfg.sweep_D_min || *cfg.sweep_D_min > 0.0, "[sweep] D_min must be > 0");
  require(!cfg.sweep_D_max || !cfg.sweep_D_min || *cfg.sweep_D_max > *cfg.sweep_D_min,
          "[sweep] D_max must exceed D_min");
}

std::string to_string(KineticsKind kind) {
  switch (kind) {
    case KineticsKind::LotkaVolterra:
      return "lotka_volterra";
    case KineticsKind::RosenzweigMacArthur:
      return "rosenzweig_macarthur";
    case KineticsKind::Custom:
      return "custom";
  }
  return "unknown";
}

std::string to_string(MotilityKind kind) {
  switch (kind) {
    case MotilityKind::D1:
      return "d1";
    case MotilityKind::D2:
      return "d2";
    case MotilityKind::D3:
      return "d3";
    case MotilityKind::Constant:
      return "constant";
    case MotilityKind::Custom:
      return "custom";
  }
  return "unknown";
}

}  // namespace preytaxis::cli
