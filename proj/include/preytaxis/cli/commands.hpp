#pragma once

// Subcommand dispatch for the preytaxis-lab executable.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "preytaxis/cli/config.hpp"
#include "preytaxis/linstab.hpp"
#include "preytaxis/model.hpp"
#include "preytaxis/solver.hpp"

namespace preytaxis::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitValidation = 3,
  kExitNoEquilibrium = 4,
  kExitBlowUp = 5,
};

struct CommandOptions {
  std::string command;  // equilibria | dispersion | bifurcation | simulate | sweep
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides [output] directory
  std::optional<std::uint64_t> seed;         // overrides [solver] seed
  bool simulate = false;                     // sweep only
};

/// Runs one subcommand. Diagnostics go to `log`; returns the process exit code.
int run_command(const CommandOptions& opts, std::ostream& log);

/// Parses argv with CLI11 and calls run_command.
int main_entry(int argc, char** argv);

/// Solver configuration for the [solver] and [domain] sections at prey diffusivity D.
/// Throws NoEquilibriumError when the requested base state does not exist.
SolverConfig make_solver_config(const RunConfig& rc, const Kinetics& kin, const Motility& mot,
                                double D);

class NoEquilibriumError : public Error {
 public:
  using Error::Error;
};

/// Linear prediction for one sweep point.
struct SweepPrediction {
  int n_unstable_hopf = 0;
  int n_unstable_steady = 0;
  std::string regime;  // stable | homogeneous_oscillation | hopf_inhomogeneous | turing | mixed
};

SweepPrediction predict_regime(const LinearizedSystem& sys, double ell);

/// Worker count for sweeps: PREYTAXIS_THREADS when set and positive, else hardware concurrency.
int sweep_thread_count(std::size_t rows);

}  // namespace preytaxis::cli
