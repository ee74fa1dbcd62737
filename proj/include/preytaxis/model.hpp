#pragma once

// Kinetics and motility families for the prey-taxis predator-prey system
//
//   u_t = (d(v) u_x)_x - (u chi(v) v_x)_x + gamma u F(v) - theta u - alpha u^2
//   v_t = D v_xx - u F(v) + f(v)
//
// together with homogeneous steady states, hypothesis checks and the
// global-stability thresholds.

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace preytaxis {

enum class KineticsKind { LotkaVolterra, RosenzweigMacArthur, Custom };

struct KineticsParams {
  double gamma = 2.0;   // conversion rate
  double theta = 1.0;   // predator death rate
  double alpha = 0.0;   // intraspecific competition
  double mu = 1.0;      // prey intrinsic growth
  double K = 4.0;       // carrying capacity
  double lambda = 1.0;  // half-saturation (Rosenzweig-MacArthur only)
};

/// User-supplied functional response F and prey kinetics f with derivatives.
struct CustomKinetics {
  std::function<double(double)> F;
  std::function<double(double)> dF;
  std::function<double(double)> f;
  std::function<double(double)> df;
};

class Kinetics {
 public:
  /// F(v) = v, f(v) = mu v (1 - v/K).
  static Kinetics lotka_volterra(const KineticsParams& p);
  /// F(v) = v / (lambda + v), f(v) = mu v (1 - v/K).
  static Kinetics rosenzweig_macarthur(const KineticsParams& p);
  static Kinetics custom(const KineticsParams& p, CustomKinetics fns);

  KineticsKind kind() const { return kind_; }
  bool is_builtin() const { return kind_ != KineticsKind::Custom; }
  const KineticsParams& params() const { return p_; }
  double gamma() const { return p_.gamma; }
  double theta() const { return p_.theta; }
  double alpha() const { return p_.alpha; }
  double mu() const { return p_.mu; }
  double K() const { return p_.K; }
  double lambda() const { return p_.lambda; }

  double F(double v) const;
  double dF(double v) const;
  double f(double v) const;
  double df(double v) const;

  /// phi(v) = f(v) / F(v), continuously extended to v = 0 for the builtins.
  double phi(double v) const;
  /// phi'(v): closed form for builtins, central differences (step 1e-6) for Custom.
  double dphi(double v) const;

 private:
  Kinetics(KineticsKind kind, const KineticsParams& p, CustomKinetics fns);

  KineticsKind kind_;
  KineticsParams p_;
  CustomKinetics custom_;
};

enum class MotilityKind { D1, D2, D3, Constant, Custom };

struct MotilityValues {
  double d = 0.0;
  double dprime = 0.0;
  double chi = 0.0;
};

class Motility {
 public:
  /// d1(v) = 1 / (1 + e^{2(v-1)}), chi = -d1'.
  static Motility d1();
  /// d2(v) = 1 / (1 + e^{(v-1)/10}), chi = -d2'.
  static Motility d2();
  /// d3(v) = 1 / (9 + e^{2(v-1)}), chi = -d3'.
  static Motility d3();
  /// Constant motility with constant taxis sensitivity.
  static Motility constant(double d, double chi);
  static Motility custom(std::function<double(double)> d, std::function<double(double)> dprime,
                         std::function<double(double)> chi, bool chi_is_minus_dprime);

  MotilityKind kind() const { return kind_; }
  bool chi_is_minus_dprime() const { return chi_is_minus_dprime_; }

  double d(double v) const;
  double dprime(double v) const;
  double chi(double v) const;
  /// d, d' and chi together; one exponential for the logistic builtins.
  MotilityValues eval(double v) const;

 private:
  Motility() = default;

  MotilityKind kind_ = MotilityKind::Constant;
  bool chi_is_minus_dprime_ = false;
  // Logistic family d(v) = 1 / (offset + exp(slope (v - 1))).
  double offset_ = 1.0;
  double slope_ = 0.0;
  double d_const_ = 1.0;
  double chi_const_ = 0.0;
  std::function<double(double)> d_fn_;
  std::function<double(double)> dprime_fn_;
  std::function<double(double)> chi_fn_;
};

struct ReactionRates {
  double du = 0.0;
  double dv = 0.0;
};

/// Source terms gamma u F(v) - theta u - alpha u^2 and f(v) - u F(v). Throws DomainError for u < 0 or v < 0.
ReactionRates eval_reaction(const Kinetics& kin, double u, double v);

/// Same as eval_reaction without the sign checks; used on the solver hot path.
inline ReactionRates eval_reaction_unchecked(const Kinetics& kin, double u, double v) {
  const double Fv = kin.F(v);
  return {kin.gamma() * u * Fv - kin.theta() * u - kin.alpha() * u * u, kin.f(v) - u * Fv};
}

enum class EquilibriumKind { Extinction, PreyOnly, Coexistence };

std::string to_string(EquilibriumKind kind);

struct Equilibrium {
  double u = 0.0;
  double v = 0.0;
  EquilibriumKind kind = EquilibriumKind::Extinction;
  double residual = 0.0;
};

struct EquilibriumSet {
  Equilibrium extinction;
  Equilibrium prey_only;
  std::optional<Equilibrium> coexistence;

  /// Extinction, prey-only, then coexistence when present.
  std::vector<Equilibrium> all() const;
};

/// max(|gamma F u - theta u - alpha u^2|, |f - u F|) at (u, v).
double equilibrium_residual(const Kinetics& kin, double u, double v);

/// Root of gamma F(v) - theta - alpha phi(v) on (eps, K - eps), bisection plus one Newton polish.
Equilibrium coexistence_by_bisection(const Kinetics& kin);

/// Homogeneous steady states. Coexistence exists iff gamma F(K) > theta.
EquilibriumSet compute_equilibria(const Kinetics& kin);

enum class HypothesisStatus { Holds, Fails, NotChecked };

std::string to_string(HypothesisStatus status);

struct HypothesisCheck {
  HypothesisStatus status = HypothesisStatus::NotChecked;
  std::optional<double> witness;  // sample where the inequality is violated
  std::string violated;           // human-readable inequality
};

struct HypothesisReport {
  HypothesisCheck h1;
  HypothesisCheck h2;
  HypothesisCheck h3;
  HypothesisCheck h4;
  double v_max = 0.0;
  int n_samples = 0;
  // Range sampled for the "f < 0 beyond K" clause of (H3).
  double beyond_k_max = 0.0;
};

inline constexpr double kHypothesisTolerance = 1e-12;

/// Samples [0, v_max] uniformly and reports each hypothesis (H1)-(H4).
HypothesisReport check_hypotheses(const Kinetics& kin, const Motility& mot, double v_max,
                                  int n_samples);

/// K0 = max(||v0||_inf, K).
double k0_bound(const Kinetics& kin, double v0_max);

enum class StabilityRegime {
  PreyOnlyExponential,  // gamma F(K) < theta
  PreyOnlyAlgebraic,    // gamma F(K) = theta and alpha > 0
  PreyOnlyUncertified,  // gamma F(K) = theta with alpha = 0: no decay statement applies
  CoexistenceRegime,    // gamma F(K) > theta
};

std::string to_string(StabilityRegime regime);

struct StabilityThresholds {
  StabilityRegime regime = StabilityRegime::PreyOnlyExponential;
  double gamma_F_K = 0.0;
  // Coexistence regime only.
  std::optional<double> d_min;
  std::optional<double> argmax_v;
  std::optional<bool> satisfied;
};

/// Smallest prey diffusivity certified by the coexistence Lyapunov argument:
///   max_{0 <= v <= K0} u* F(v)^2 chi(v)^2 / (4 gamma F(v*) F'(v) d(v)).
/// Dense grid of 10^4 points, then golden-section refinement around the discrete maximizer.
StabilityThresholds global_stability_report(const Kinetics& kin, const Motility& mot, double D,
                                            double v0_max);

}  // namespace preytaxis
