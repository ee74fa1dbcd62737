#pragma once

// Conservative finite-volume method of lines on [0, ell] with zero-flux boundaries.
//
// Cell i has center x_i = (i + 1/2) h. The predator flux through the interior face i+1/2 is
//
//   Phi = d(v_f) (u_{i+1} - u_i) / h - u_f chi(v_f) (v_{i+1} - v_i) / h,
//
// with u_f, v_f arithmetic means of the neighbouring cells; the prey flux is D (v_{i+1} - v_i) / h.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "preytaxis/errors.hpp"
#include "preytaxis/model.hpp"

namespace preytaxis {

struct Grid1D {
  double ell = 1.0;
  int n_cells = 8;

  Grid1D() = default;
  /// Throws ValidationError unless ell > 0 and n_cells >= 8.
  Grid1D(double length, int cells);

  double h() const { return ell / n_cells; }
  double x(int i) const { return (i + 0.5) * h(); }
};

struct State {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

struct Derivative {
  std::vector<double> du;
  std::vector<double> dv;
};

enum class Scheme { ExplicitRK4, IMEX };

std::string to_string(Scheme scheme);

enum class PerturbationMode {
  Auto,            // multiplicative, additive for components that are exactly zero
  Multiplicative,  // u_i = u_s (1 + eps xi_i)
  Additive,        // u_i = u_s + eps K (1 + xi_i) / 2
};

struct Perturbation {
  double epsilon = 0.01;
  std::uint64_t seed = 42;
  PerturbationMode mode = PerturbationMode::Auto;
};

/// Name of the generator behind init_state, recorded in run manifests.
inline constexpr const char* kPrngName = "mt19937_64";

struct SolverConfig {
  SolverConfig(Kinetics kinetics, Motility motility, double prey_diffusivity, Grid1D grid_);

  Kinetics kin;
  Motility mot;
  double D;
  Grid1D grid;
  Scheme scheme = Scheme::ExplicitRK4;
  double cfl_safety = 0.4;
  double t_end = 1.0;
  // Empty means 200 evenly spaced times over [0, t_end].
  std::vector<double> snapshot_times;
  // Number of timeseries intervals over [0, t_end].
  int output_count = 2000;
  Perturbation perturbation;
  // Unperturbed initial fields; one entry per cell.
  std::vector<double> base_u;
  std::vector<double> base_v;
  // Turns every reaction term off (pure transport), used for conservation checks.
  bool reactions = true;
  // Largest IMEX step; the explicit scheme is bounded by stable_dt alone.
  double imex_dt_max = 1e-2;
  bool record_lyapunov = true;

  /// Sets base_u, base_v to the homogeneous state (u, v).
  void set_homogeneous_base(double u, double v);

  /// Throws ValidationError when a field violates its precondition.
  void validate() const;
};

struct TimeseriesRow {
  double t = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  double min_v = 0.0;
  double max_v = 0.0;
  double l2_dev_u = 0.0;  // || u - base_u ||_2
  double l2_dev_v = 0.0;
  double std_u = 0.0;  // spatial standard deviation
  double std_v = 0.0;
  std::optional<double> V1;
  std::optional<double> V2;
};

struct Trajectory {
  Grid1D grid;
  std::vector<State> snapshots;
  std::vector<TimeseriesRow> timeseries;
  long steps = 0;
  std::vector<std::string> warnings;
};

/// Raised when a field becomes non-finite or exceeds 1e6. Carries the trajectory up to the failure.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, Trajectory partial) : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

/// Raised when min(u) or min(v) drops below -1e-8.
class NonPhysicalError : public Error {
 public:
  NonPhysicalError(const std::string& what, Trajectory partial)
      : Error(what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

inline constexpr double kBlowUpThreshold = 1e6;
inline constexpr double kNegativityThreshold = -1e-8;

/// Perturbed base state: u_i = u_s (1 + eps xi_i), v_i = v_s (1 + eps xi'_i), xi uniform on [-1, 1].
State init_state(const SolverConfig& cfg);

Derivative rhs(const State& state, const SolverConfig& cfg);

/// cfl * min(h^2 / (2 max(d_max, D)), h / w_max), capped by the timeseries interval.
double stable_dt(const State& state, const SolverConfig& cfg);

TimeseriesRow measure(const State& state, const SolverConfig& cfg,
                      const std::optional<Equilibrium>& coexistence);

Trajectory integrate(const SolverConfig& cfg);

}  // namespace preytaxis
