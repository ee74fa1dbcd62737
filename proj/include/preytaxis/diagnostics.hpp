#pragma once

#include <span>
#include <string>

#include "preytaxis/model.hpp"
#include "preytaxis/solver.hpp"

namespace preytaxis {

/// zeta(v) = int_omega^v (F(s) - F(omega)) / F(s) ds. Closed form for the builtins,
/// adaptive Simpson (tolerance 1e-10) for Custom kinetics.
double zeta(const Kinetics& kin, double omega, double v);

/// Prey-only functional: (1/gamma) int u + int zeta_K(v), midpoint rule over the cells.
double lyapunov_v1(const State& state, const Grid1D& grid, const Kinetics& kin);

/// Coexistence functional: (1/gamma) int (u - u* - u* ln(u/u*)) + int zeta_{v*}(v).
double lyapunov_v2(const State& state, const Grid1D& grid, const Kinetics& kin,
                   const Equilibrium& coexistence);

struct ZetaBoundsReport {
  double omega = 0.0;
  double delta = 0.0;
  int n_samples = 0;
  bool lower_holds = true;  // F'(w)/(4F(w)) (v-w)^2 <= zeta(v)
  bool upper_holds = true;  // zeta(v) <= F'(w)/F(w) (v-w)^2
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
};

/// Samples v in [omega - delta, omega + delta] against the two quadratic bounds.
ZetaBoundsReport zeta_bounds_check(const Kinetics& kin, double omega, double delta,
                                   int n_samples = 1000);

enum class PatternKind {
  HomogeneousStationary,
  HomogeneousPeriodic,
  StationaryInhomogeneous,
  SpatioTemporal,
};

std::string to_string(PatternKind kind);

// Classifier thresholds.
inline constexpr double kInhomogeneityThreshold = 1e-2;
inline constexpr double kOscillationThreshold = 1e-2;
inline constexpr double kPeriodicityThreshold = 0.95;
inline constexpr int kMinTailPoints = 50;

struct PatternClass {
  PatternKind kind = PatternKind::HomogeneousStationary;
  bool inhomogeneous = false;
  bool oscillating = false;
  bool periodic = false;
  double spatial_std_u = 0.0;           // tail average of the spatial std of u
  double oscillation_amplitude = 0.0;   // peak-to-peak of mass_u over the tail
  double mean_mass_u = 0.0;
  double max_autocorrelation = 0.0;     // past the first zero crossing
  int tail_points = 0;
};

/// Tail autocorrelation of a series: Pearson correlation of x[0, N-L) and x[L, N), maximized
/// over lags L from the first negative correlation up to N/2. Zero for a constant series.
double max_tail_autocorrelation(std::span<const double> x);

PatternClass classify_pattern(const Trajectory& traj, double tail_fraction = 0.2);

enum class DecayVerdict { Exponential, Algebraic, NoDecay };

std::string to_string(DecayVerdict verdict);

struct DecayFit {
  // Exponent of the winning fit: e^{-rate t} or (1+t)^{-rate}.
  double rate = 0.0;
  double r_squared = 0.0;
  DecayVerdict verdict = DecayVerdict::NoDecay;
  double exponential_rate = 0.0;
  double exponential_r_squared = 0.0;
  double algebraic_exponent = 0.0;
  double algebraic_r_squared = 0.0;
  int n_points = 0;
};

/// Norm of the distance to the reference state in one row: ||u||_inf for the prey-only and
/// extinction states, ||u - u*||_inf (from min/max) for coexistence.
double decay_norm(const TimeseriesRow& row, const Equilibrium& reference);

/// Least-squares fits of log-norm against t and against log(1 + t) over the tail. The better
/// fit wins if its R^2 is at least 0.99 and its exponent is positive; otherwise NoDecay.
/// Throws InsufficientDataError below 100 usable tail points.
DecayFit decay_fit(std::span<const TimeseriesRow> rows, const Equilibrium& reference,
                   double tail_fraction = 0.5);

}  // namespace preytaxis
