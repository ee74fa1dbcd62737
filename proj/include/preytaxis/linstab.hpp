#pragma once

// Linear stability of homogeneous steady states: for a Neumann cosine mode of
// wavenumber k the perturbation grows like exp(rho t) with rho an eigenvalue of
//
//   M_k = -k^2 A + B,   A = [[d(v_s), -u_s chi(v_s)], [0, D]],   B = reaction Jacobian,
//
// i.e. a root of rho^2 + a rho + b = 0 with a = -tr M_k and b = det M_k.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "preytaxis/model.hpp"

namespace preytaxis {

struct Mat2 {
  double m00 = 0.0, m01 = 0.0;
  double m10 = 0.0, m11 = 0.0;

  double trace() const { return m00 + m11; }
  double det() const { return m00 * m11 - m01 * m10; }
};

struct LinearizedSystem {
  Mat2 A;  // diffusion / taxis
  Mat2 B;  // reaction Jacobian, entries B1 B2 / B3 B4
  Equilibrium eq;
  double D = 0.0;
  double d_s = 0.0;
  double chi_s = 0.0;

  /// M_k = -k^2 A + B.
  Mat2 mode_matrix(double k) const;
};

/// A from the motility at v_s; B as the exact Jacobian of eval_reaction at (u_s, v_s).
LinearizedSystem linearize(const Kinetics& kin, const Motility& mot, double D, const Equilibrium& eq);

enum class ModeClass { Stable, HopfUnstable, SteadyUnstable, Marginal };

std::string to_string(ModeClass klass);

inline constexpr double kMarginalTolerance = 1e-12;

struct DispersionPoint {
  double k = 0.0;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
  // rho[0] carries the larger real part.
  std::array<std::complex<double>, 2> rho;
  ModeClass klass = ModeClass::Stable;

  double max_real() const { return rho[0].real(); }
};

/// Roots of rho^2 + a rho + b = 0, ordered by decreasing real part, without cancellation.
std::array<std::complex<double>, 2> quadratic_roots(double a, double b);

/// Classification from the coefficients (a, b) and the leading real part.
ModeClass classify_mode(double a, double b, double delta, double max_real);

DispersionPoint dispersion(const LinearizedSystem& sys, double k);

struct BetaCoefficients {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
};

/// Closed-form a(D, k^2) = (d* + D) k^2 - beta1 and b(D, k^2) = d* D k^4 - beta2 k^2 + beta3
/// for Rosenzweig-MacArthur kinetics with alpha = 0 at the coexistence state.
BetaCoefficients beta_coefficients(const Kinetics& kin, const Motility& mot, const Equilibrium& eq);

struct BifurcationCurve {
  std::vector<double> eta;
  std::vector<double> D_H;  // a(D_H(eta), eta) = 0
  std::vector<double> D_S;  // b(D_S(eta), eta) = 0
};

/// Hopf and steady-state bifurcation curves from the generic coefficients of a(D, eta), b(D, eta).
BifurcationCurve bifurcation_curves(const LinearizedSystem& sys, std::span<const double> eta_grid);
BifurcationCurve bifurcation_curves(const Kinetics& kin, const Motility& mot, const Equilibrium& eq,
                                    std::span<const double> eta_grid);

/// Interval in eta = k^2, lower < upper. upper may be +inf.
struct Band {
  double lower = 0.0;
  double upper = 0.0;
};

/// The eta-interval where b(D, eta) < 0. Present iff beta2 > 0 and Lambda = beta2^2 - 4 beta3 D d* > 0.
std::optional<Band> steady_band(const BetaCoefficients& beta, double D, double d_star);

/// The eta-interval (clipped to eta >= 0) where the discriminant a^2 - 4b is negative.
std::optional<Band> hopf_band(const BetaCoefficients& beta, double D, double d_star);

/// The D solving Lambda(D) = beta2^2 - 4 beta3 D d* = 0, by bisection. Absent unless beta2 > 0.
std::optional<double> steady_threshold_D(const BetaCoefficients& beta, double d_star);

struct ModeInfo {
  int n = 0;
  double k = 0.0;
  DispersionPoint point;
};

/// Smallest mode index whose eta = (n pi / ell)^2 lies beyond every instability region, plus 2.
int mode_cutoff(const LinearizedSystem& sys, double ell);

/// Classification of every Neumann mode n = 0..n_max on [0, ell].
std::vector<ModeInfo> mode_spectrum(const LinearizedSystem& sys, double ell, int n_max);

/// Non-stable modes n = 0..mode_cutoff on [0, ell].
std::vector<ModeInfo> unstable_modes(const Kinetics& kin, const Motility& mot, double D,
                                     const Equilibrium& eq, double ell);
std::vector<ModeInfo> unstable_modes(const LinearizedSystem& sys, double ell);

struct StabilizingD {
  // a(D, 0) < 0: the homogeneous mode is unstable for every D.
  bool homogeneous_mode_unstable = false;
  // Supremum of D_H and D_S over eta = (n pi / ell)^2, n >= 1, clamped at 0; absent when
  // the homogeneous mode is unstable.
  std::optional<double> d_min;
};

StabilizingD min_stabilizing_D(const Kinetics& kin, const Motility& mot, const Equilibrium& eq,
                               double ell);

}  // namespace preytaxis
