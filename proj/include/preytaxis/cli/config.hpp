#pragma once

// Flat INI-style run configuration: [section] headers, key = value lines, '#' comments.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "preytaxis/errors.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/solver.hpp"

namespace preytaxis::cli {

/// Syntax errors, unknown sections or keys, unparsable values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct IniEntry {
  std::string section;
  std::string key;
  std::string value;
  int line = 0;
};

/// Parses the INI text. Duplicate keys and entries outside a section are errors.
std::vector<IniEntry> parse_ini(std::istream& in);

enum class InitialState { Coexistence, PreyOnly, Explicit };

struct RunConfig {
  // [model]
  KineticsKind model_kind = KineticsKind::RosenzweigMacArthur;
  KineticsParams params;
  // [motility]
  MotilityKind motility_kind = MotilityKind::D1;
  double d_const = 1.0;
  double chi_const = 0.0;
  // [domain]
  double length = 8.0 * 3.14159265358979323846;
  int n_cells = 256;
  // [solver]
  Scheme scheme = Scheme::ExplicitRK4;
  double cfl_safety = 0.4;
  double t_end = 500.0;
  int snapshot_count = 200;
  int output_count = 2000;
  double epsilon = 0.01;
  std::uint64_t seed = 42;
  InitialState initial = InitialState::Coexistence;
  double u0 = 0.0;
  double v0 = 0.0;
  // [analysis]
  double D = 0.1;
  std::optional<double> ell;  // defaults to [domain] length
  std::optional<int> n_max;
  double eta_min = 1e-3;
  double eta_max = 10.0;
  int eta_count = 400;
  bool eta_log = true;
  std::optional<double> k_max;
  int k_count = 401;
  // [sweep]: either an explicit list or a range
  std::vector<double> sweep_D;
  std::optional<double> sweep_D_min;
  std::optional<double> sweep_D_max;
  int sweep_D_count = 0;
  bool sweep_log = true;
  // [output]
  std::string directory = "run";

  // Every key that appeared in the file, in file order, for the manifest echo.
  std::vector<IniEntry> entries;

  double analysis_ell() const { return ell.value_or(length); }
  /// Sweep points from D_values, or from D_min, D_max, D_count.
  std::vector<double> sweep_points() const;
};

/// Parses and type-checks a configuration. Throws ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

// Model construction. These throw ValidationError when a value violates a module precondition.
Kinetics make_kinetics(const RunConfig& cfg);
Motility make_motility(const RunConfig& cfg);
Grid1D make_grid(const RunConfig& cfg);
/// Checks the numeric fields that are not covered by the constructors above.
void validate_ranges(const RunConfig& cfg);

std::string to_string(KineticsKind kind);
std::string to_string(MotilityKind kind);

}  // namespace preytaxis::cli
