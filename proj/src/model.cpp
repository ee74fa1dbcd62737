#include "preytaxis/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "preytaxis/errors.hpp"

namespace preytaxis {

namespace {

void validate(KineticsKind kind, const KineticsParams& p) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ValidationError(std::string("invalid kinetics: ") + what);
  };
  require(std::isfinite(p.gamma) && p.gamma > 0.0, "gamma must be > 0");
  require(std::isfinite(p.theta) && p.theta > 0.0, "theta must be > 0");
  require(std::isfinite(p.alpha) && p.alpha >= 0.0, "alpha must be >= 0");
  require(std::isfinite(p.mu) && p.mu > 0.0, "mu must be > 0");
  require(std::isfinite(p.K) && p.K > 0.0, "K must be > 0");
  if (kind == KineticsKind::RosenzweigMacArthur) {
    require(std::isfinite(p.lambda) && p.lambda > 0.0, "lambda must be > 0");
  }
}

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

Kinetics::Kinetics(KineticsKind kind, const KineticsParams& p, CustomKinetics fns)
    : kind_(kind), p_(p), custom_(std::move(fns)) {
  validate(kind_, p_);
}

Kinetics Kinetics::lotka_volterra(const KineticsParams& p) {
  return Kinetics(KineticsKind::LotkaVolterra, p, {});
}

Kinetics Kinetics::rosenzweig_macarthur(const KineticsParams& p) {
  return Kinetics(KineticsKind::RosenzweigMacArthur, p, {});
}

Kinetics Kinetics::custom(const KineticsParams& p, CustomKinetics fns) {
  if (!fns.F || !fns.dF || !fns.f || !fns.df) {
    throw ValidationError("invalid kinetics: custom kinetics needs F, F', f and f'");
  }
  return Kinetics(KineticsKind::Custom, p, std::move(fns));
}

double Kinetics::F(double v) const {
  switch (kind_) {
    case KineticsKind::LotkaVolterra:
      return v;
    case KineticsKind::RosenzweigMacArthur:
      return v / (p_.lambda + v);
    case KineticsKind::Custom:
      break;
  }
  return custom_.F(v);
}

double Kinetics::dF(double v) const {
  switch (kind_) {
    case KineticsKind::LotkaVolterra:
      return 1.0;
    case KineticsKind::RosenzweigMacArthur: {
      const double s = p_.lambda + v;
      return p_.lambda / (s * s);
    }
    case KineticsKind::Custom:
      break;
  }
  return custom_.dF(v);
}

double Kinetics::f(double v) const {
  if (kind_ == KineticsKind::Custom) return custom_.f(v);
  return p_.mu * v * (1.0 - v / p_.K);
}

double Kinetics::df(double v) const {
  if (kind_ == KineticsKind::Custom) return custom_.df(v);
  return p_.mu * (1.0 - 2.0 * v / p_.K);
}

double Kinetics::phi(double v) const {
  switch (kind_) {
    case KineticsKind::LotkaVolterra:
      return p_.mu * (1.0 - v / p_.K);
    case KineticsKind::RosenzweigMacArthur:
      return p_.mu * (1.0 - v / p_.K) * (p_.lambda + v);
    case KineticsKind::Custom:
      break;
  }
  return custom_.f(v) / custom_.F(v);
}

double Kinetics::dphi(double v) const {
  switch (kind_) {
    case KineticsKind::LotkaVolterra:
      return -p_.mu / p_.K;
    case KineticsKind::RosenzweigMacArthur:
      return p_.mu * (1.0 - p_.lambda / p_.K - 2.0 * v / p_.K);
    case KineticsKind::Custom:
      break;
  }
  constexpr double step = 1e-6;
  return (phi(v + step) - phi(v - step)) / (2.0 * step);
}

Motility Motility::d1() {
  Motility m;
  m.kind_ = MotilityKind::D1;
  m.chi_is_minus_dprime_ = true;
  m.offset_ = 1.0;
  m.slope_ = 2.0;
  return m;
}

Motility Motility::d2() {
  Motility m;
  m.kind_ = MotilityKind::D2;
  m.chi_is_minus_dprime_ = true;
  m.offset_ = 1.0;
  m.slope_ = 0.1;
  return m;
}

Motility Motility::d3() {
  Motility m;
  m.kind_ = MotilityKind::D3;
  m.chi_is_minus_dprime_ = true;
  m.offset_ = 9.0;
  m.slope_ = 2.0;
  return m;
}

Motility Motility::constant(double d, double chi) {
  if (!(std::isfinite(d) && d > 0.0)) throw ValidationError("invalid motility: d must be > 0");
  if (!std::isfinite(chi)) throw ValidationError("invalid motility: chi must be finite");
  Motility m;
  m.kind_ = MotilityKind::Constant;
  m.chi_is_minus_dprime_ = chi == 0.0;
  m.d_const_ = d;
  m.chi_const_ = chi;
  return m;
}

Motility Motility::custom(std::function<double(double)> d, std::function<double(double)> dprime,
                          std::function<double(double)> chi, bool chi_is_minus_dprime) {
  if (!d || !dprime) throw ValidationError("invalid motility: custom motility needs d and d'");
  if (!chi && !chi_is_minus_dprime) {
    throw ValidationError("invalid motility: custom motility needs chi or chi = -d'");
  }
  Motility m;
  m.kind_ = MotilityKind::Custom;
  m.chi_is_minus_dprime_ = chi_is_minus_dprime;
  m.d_fn_ = std::move(d);
  m.dprime_fn_ = std::move(dprime);
  m.chi_fn_ = std::move(chi);
  return m;
}

double Motility::d(double v) const {
  switch (kind_) {
    case MotilityKind::D1:
    case MotilityKind::D2:
    case MotilityKind::D3:
      return 1.0 / (offset_ + std::exp(slope_ * (v - 1.0)));
    case MotilityKind::Constant:
      return d_const_;
    case MotilityKind::Custom:
      break;
  }
  return d_fn_(v);
}

double Motility::dprime(double v) const {
  switch (kind_) {
    case MotilityKind::D1:
    case MotilityKind::D2:
    case MotilityKind::D3: {
      // d' = -s e / (c + e)^2 = -s d (1 - c d), which stays finite when e overflows.
      const double dv = d(v);
      return -slope_ * dv * (1.0 - offset_ * dv);
    }
    case MotilityKind::Constant:
      return 0.0;
    case MotilityKind::Custom:
      break;
  }
  return dprime_fn_(v);
}

double Motility::chi(double v) const {
  switch (kind_) {
    case MotilityKind::D1:
    case MotilityKind::D2:
    case MotilityKind::D3:
      return -dprime(v);
    case MotilityKind::Constant:
      return chi_const_;
    case MotilityKind::Custom:
      break;
  }
  return chi_is_minus_dprime_ ? -dprime_fn_(v) : chi_fn_(v);
}

MotilityValues Motility::eval(double v) const {
  switch (kind_) {
    case MotilityKind::D1:
    case MotilityKind::D2:
    case MotilityKind::D3: {
      const double dv = 1.0 / (offset_ + std::exp(slope_ * (v - 1.0)));
      const double dp = -slope_ * dv * (1.0 - offset_ * dv);
      return {dv, dp, -dp};
    }
    case MotilityKind::Constant:
      return {d_const_, 0.0, chi_const_};
    case MotilityKind::Custom:
      break;
  }
  return {d(v), dprime(v), chi(v)};
}

ReactionRates eval_reaction(const Kinetics& kin, double u, double v) {
  if (!(u >= 0.0) || !(v >= 0.0)) {
    throw DomainError("eval_reaction: densities must be nonnegative (u=" + fmt_double(u) +
                      ", v=" + fmt_double(v) + ")");
  }
  return eval_reaction_unchecked(kin, u, v);
}

std::string to_string(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Extinction:
      return "extinction";
    case EquilibriumKind::PreyOnly:
      return "prey_only";
    case EquilibriumKind::Coexistence:
      return "coexistence";
  }
  return "unknown";
}

std::vector<Equilibrium> EquilibriumSet::all() const {
  std::vector<Equilibrium> out{extinction, prey_only};
  if (coexistence) out.push_back(*coexistence);
  return out;
}

double equilibrium_residual(const Kinetics& kin, double u, double v) {
  const ReactionRates r = eval_reaction_unchecked(kin, u, v);
  return std::max(std::abs(r.du), std::abs(r.dv));
}

Equilibrium coexistence_by_bisection(const Kinetics& kin) {
  const double K = kin.K();
  auto g = [&](double v) { return kin.gamma() * kin.F(v) - kin.theta() - kin.alpha() * kin.phi(v); };

  const double eps = 1e-12 * K;
  double lo = eps;
  double hi = K - eps;
  double glo = g(lo);
  double ghi = g(hi);
  if (!(glo < 0.0 && ghi > 0.0)) {
    throw RootFindError("coexistence root not bracketed on (eps, K - eps): g(lo)=" + fmt_double(glo) +
                        ", g(hi)=" + fmt_double(ghi));
  }
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (gm < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double v = 0.5 * (lo + hi);
  const double slope = kin.gamma() * kin.dF(v) - kin.alpha() * kin.dphi(v);
  if (slope != 0.0 && std::isfinite(slope)) {
    const double polished = v - g(v) / slope;
    if (polished > eps && polished < K - eps && std::abs(g(polished)) <= std::abs(g(v))) v = polished;
  }

  Equilibrium eq;
  eq.v = v;
  eq.u = kin.phi(v);
  eq.kind = EquilibriumKind::Coexistence;
  eq.residual = equilibrium_residual(kin, eq.u, eq.v);
  return eq;
}

EquilibriumSet compute_equilibria(const Kinetics& kin) {
  EquilibriumSet set;
  set.extinction = {0.0, 0.0, EquilibriumKind::Extinction, equilibrium_residual(kin, 0.0, 0.0)};
  set.prey_only = {0.0, kin.K(), EquilibriumKind::PreyOnly, equilibrium_residual(kin, 0.0, kin.K())};

  if (!(kin.gamma() * kin.F(kin.K()) > kin.theta())) return set;

  const KineticsParams& p = kin.params();
  Equilibrium eq;
  eq.kind = EquilibriumKind::Coexistence;
  if (kin.kind() == KineticsKind::LotkaVolterra) {
    const double den = p.gamma * p.K + p.mu * p.alpha;
    eq.u = p.mu * (p.gamma * p.K - p.theta) / den;
    eq.v = p.K * (p.mu * p.alpha + p.theta) / den;
  } else if (kin.kind() == KineticsKind::RosenzweigMacArthur && p.alpha == 0.0) {
    const double g = p.gamma - p.theta;
    eq.v = p.theta * p.lambda / g;
    eq.u = p.gamma * p.lambda * p.mu * (g * p.K - p.theta * p.lambda) / (g * g * p.K);
  } else {
    set.coexistence = coexistence_by_bisection(kin);
    return set;
  }
  eq.residual = equilibrium_residual(kin, eq.u, eq.v);
  set.coexistence = eq;
  return set;
}

std::string to_string(HypothesisStatus status) {
  switch (status) {
    case HypothesisStatus::Holds:
      return "holds";
    case HypothesisStatus::Fails:
      return "fails";
    case HypothesisStatus::NotChecked:
      return "not_checked";
  }
  return "unknown";
}

namespace {

// Records the first violation; later ones are ignored.
struct CheckBuilder {
  HypothesisCheck check{HypothesisStatus::Holds, std::nullopt, {}};

  void fail_if(bool violated, double v, const std::string& what) {
    if (violated && check.status != HypothesisStatus::Fails) {
      check.status = HypothesisStatus::Fails;
      check.witness = v;
      check.violated = what;
    }
  }
};

}  // namespace

HypothesisReport check_hypotheses(const Kinetics& kin, const Motility& mot, double v_max,
                                  int n_samples) {
  if (!(v_max > 0.0)) throw DomainError("check_hypotheses: v_max must be > 0");
  if (n_samples < 100) throw DomainError("check_hypotheses: n_samples must be >= 100");

  constexpr double tol = kHypothesisTolerance;
  const double K = kin.K();
  std::vector<double> samples(static_cast<std::size_t>(n_samples));
  for (int j = 0; j < n_samples; ++j) samples[j] = v_max * j / (n_samples - 1);

  HypothesisReport report;
  report.v_max = v_max;
  report.n_samples = n_samples;

  CheckBuilder h1;
  for (double v : samples) {
    h1.fail_if(-mot.d(v) > tol, v, "d(v) > 0");
    h1.fail_if(-mot.chi(v) > tol, v, "chi(v) >= 0");
    h1.fail_if(mot.dprime(v) > tol, v, "d'(v) <= 0");
  }
  report.h1 = h1.check;

  CheckBuilder h2;
  h2.fail_if(std::abs(kin.F(0.0)) > tol, 0.0, "F(0) = 0");
  for (double v : samples) {
    if (v > 0.0) h2.fail_if(-kin.F(v) > tol, v, "F(v) > 0");
    h2.fail_if(-kin.dF(v) > tol, v, "F'(v) > 0");
  }
  report.h2 = h2.check;

  CheckBuilder h3;
  h3.fail_if(std::abs(kin.f(0.0)) > tol, 0.0, "f(0) = 0");
  h3.fail_if(std::abs(kin.f(K)) > tol, K, "f(K) = 0");
  for (double v : samples) h3.fail_if(kin.f(v) - kin.mu() * v > tol, v, "f(v) <= mu v");
  // The "beyond K" clause needs samples above K even when v_max <= K.
  report.beyond_k_max = std::max(v_max, 2.0 * K);
  for (int j = 1; j < n_samples; ++j) {
    const double v = K + (report.beyond_k_max - K) * j / (n_samples - 1);
    h3.fail_if(kin.f(v) > tol, v, "f(v) < 0 for v > K");
  }
  report.h3 = h3.check;

  CheckBuilder h4;
  const double phi0 = kin.is_builtin() ? kin.phi(0.0) : kin.phi(1e-9 * std::max(1.0, K));
  h4.fail_if(-phi0 > tol || phi0 == 0.0, 0.0, "phi(0+) > 0");
  for (double v : samples) {
    // Central differences need room below v for Custom kinetics.
    const double at = kin.is_builtin() ? v : std::max(v, 1e-6);
    h4.fail_if(kin.dphi(at) > tol, at, "phi'(v) < 0");
  }
  report.h4 = h4.check;
  return report;
}

double k0_bound(const Kinetics& kin, double v0_max) {
  if (!(v0_max >= 0.0)) throw DomainError("k0_bound: v0_max must be >= 0");
  return std::max(v0_max, kin.K());
}

std::string to_string(StabilityRegime regime) {
  switch (regime) {
    case StabilityRegime::PreyOnlyExponential:
      return "prey_only_exponential";
    case StabilityRegime::PreyOnlyAlgebraic:
      return "prey_only_algebraic";
    case StabilityRegime::PreyOnlyUncertified:
      return "prey_only_uncertified";
    case StabilityRegime::CoexistenceRegime:
      return "coexistence";
  }
  return "unknown";
}

StabilityThresholds global_stability_report(const Kinetics& kin, const Motility& mot, double D,
                                            double v0_max) {
  if (!(D > 0.0)) throw DomainError("global_stability_report: D must be > 0");

  StabilityThresholds out;
  out.gamma_F_K = kin.gamma() * kin.F(kin.K());
  const double gap = out.gamma_F_K - kin.theta();
  if (std::abs(gap) <= 1e-12) {
    out.regime = kin.alpha() > 0.0 ? StabilityRegime::PreyOnlyAlgebraic
                                   : StabilityRegime::PreyOnlyUncertified;
    return out;
  }
  if (gap < 0.0) {
    out.regime = StabilityRegime::PreyOnlyExponential;
    return out;
  }
  out.regime = StabilityRegime::CoexistenceRegime;

  const Equilibrium eq = *compute_equilibria(kin).coexistence;
  const double scale = eq.u / (4.0 * kin.gamma() * kin.F(eq.v));
  auto integrand = [&](double v) {
    const double dFv = kin.dF(v);
    const double dv = mot.d(v);
    if (dFv == 0.0 || dv == 0.0 || !std::isfinite(dFv) || !std::isfinite(dv)) {
      throw DomainError("global_stability_report: F'(v) or d(v) vanishes at v=" + fmt_double(v));
    }
    const double Fv = kin.F(v);
    const double chi = mot.chi(v);
    return scale * Fv * Fv * chi * chi / (dFv * dv);
  };

  const double K0 = k0_bound(kin, v0_max);
  constexpr int n_grid = 10000;
  const double step = K0 / (n_grid - 1);
  int best = 0;
  double best_val = integrand(0.0);
  for (int j = 1; j < n_grid; ++j) {
    const double val = integrand(j * step);
    if (val > best_val) {
      best_val = val;
      best = j;
    }
  }

  // Golden-section search on the two cells around the discrete maximizer.
  double lo = std::max(0.0, (best - 1) * step);
  double hi = std::min(K0, (best + 1) * step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = integrand(x1);
  double f2 = integrand(x2);
  for (int it = 0; it < 100 && hi - lo > 1e-14 * std::max(1.0, K0); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = integrand(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = integrand(x1);
    }
  }
  double arg = best * step;
  for (double x : {x1, x2}) {
    const double val = integrand(x);
    if (val > best_val) {
      best_val = val;
      arg = x;
    }
  }

  out.d_min = best_val;
  out.argmax_v = arg;
  out.satisfied = D >= best_val;
  return out;
}

}  // namespace preytaxis
