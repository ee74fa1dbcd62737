#include "preytaxis/linstab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "preytaxis/errors.hpp"

namespace preytaxis {

Mat2 LinearizedSystem::mode_matrix(double k) const {
  const double k2 = k * k;
  return {-k2 * A.m00 + B.m00, -k2 * A.m01 + B.m01, -k2 * A.m10 + B.m10, -k2 * A.m11 + B.m11};
}

LinearizedSystem linearize(const Kinetics& kin, const Motility& mot, double D, const Equilibrium& eq) {
  if (!(equilibrium_residual(kin, eq.u, eq.v) < 1e-10)) {
    throw DomainError("linearize: (u, v) is not an equilibrium (residual >= 1e-10)");
  }
  const double u = eq.u;
  const double v = eq.v;

  LinearizedSystem sys;
  sys.eq = eq;
  sys.D = D;
  sys.d_s = mot.d(v);
  sys.chi_s = mot.chi(v);
  sys.A = {sys.d_s, -u * sys.chi_s, 0.0, D};
  sys.B.m00 = kin.gamma() * kin.F(v) - kin.theta() - 2.0 * kin.alpha() * u;
  sys.B.m01 = kin.gamma() * u * kin.dF(v);
  sys.B.m10 = -kin.F(v);
  sys.B.m11 = -u * kin.dF(v) + kin.df(v);
  return sys;
}

std::string to_string(ModeClass klass) {
  switch (klass) {
    case ModeClass::Stable:
      return "stable";
    case ModeClass::HopfUnstable:
      return "hopf_unstable";
    case ModeClass::SteadyUnstable:
      return "steady_unstable";
    case ModeClass::Marginal:
      return "marginal";
  }
  return "unknown";
}

std::array<std::complex<double>, 2> quadratic_roots(double a, double b) {
  const double delta = a * a - 4.0 * b;
  if (delta < 0.0) {
    const double re = -0.5 * a;
    const double im = 0.5 * std::sqrt(-delta);
    return {std::complex<double>(re, im), std::complex<double>(re, -im)};
  }
  const double q = -0.5 * (a + std::copysign(std::sqrt(delta), a));
  double r1 = q;
  double r2 = q != 0.0 ? b / q : 0.0;
  if (r2 > r1) std::swap(r1, r2);
  return {std::complex<double>(r1, 0.0), std::complex<double>(r2, 0.0)};
}

ModeClass classify_mode(double a, double b, double delta, double max_real) {
  if (std::abs(max_real) <= kMarginalTolerance) return ModeClass::Marginal;
  if (max_real < 0.0) return ModeClass::Stable;
  if (b < 0.0) return ModeClass::SteadyUnstable;
  if (a < 0.0 && delta < 0.0) return ModeClass::HopfUnstable;
  return ModeClass::SteadyUnstable;
}

DispersionPoint dispersion(const LinearizedSystem& sys, double k) {
  if (!(k >= 0.0)) throw DomainError("dispersion: k must be >= 0");
  const double k2 = k * k;
  const double d = sys.A.m00;
  const double u_chi = -sys.A.m01;
  const Mat2& B = sys.B;

  DispersionPoint p;
  p.k = k;
  p.a = (d + sys.D) * k2 - (B.m00 + B.m11);
  p.b = d * sys.D * k2 * k2 - (d * B.m11 + u_chi * B.m10 + B.m00 * sys.D) * k2 + B.det();
  p.delta = p.a * p.a - 4.0 * p.b;
  p.rho = quadratic_roots(p.a, p.b);
  p.klass = classify_mode(p.a, p.b, p.delta, p.max_real());
  return p;
}

BetaCoefficients beta_coefficients(const Kinetics& kin, const Motility& mot, const Equilibrium& eq) {
  if (kin.kind() != KineticsKind::RosenzweigMacArthur || kin.alpha() != 0.0) {
    throw DomainError("beta_coefficients: requires Rosenzweig-MacArthur kinetics with alpha = 0");
  }
  if (eq.kind != EquilibriumKind::Coexistence) {
    throw DomainError("beta_coefficients: requires the coexistence equilibrium");
  }
  const double mu = kin.mu();
  const double K = kin.K();
  const double lambda = kin.lambda();
  const double v = eq.v;
  const double d = mot.d(v);
  const double chi = mot.chi(v);

  BetaCoefficients beta;
  beta.beta1 = mu * v * (K - lambda - 2.0 * v) / (K * (lambda + v));
  beta.beta2 = beta.beta1 * d - mu * v * (K - v) * chi / K;
  beta.beta3 = lambda * kin.theta() * mu * (K - v) / (K * (lambda + v));
  return beta;
}

BifurcationCurve bifurcation_curves(const LinearizedSystem& sys, std::span<const double> eta_grid) {
  const double d = sys.A.m00;
  const double u_chi = -sys.A.m01;
  const Mat2& B = sys.B;
  // b(D, eta) = D (d eta^2 - B1 eta) - p eta + det B
  const double p = d * B.m11 + u_chi * B.m10;

  BifurcationCurve curve;
  curve.eta.assign(eta_grid.begin(), eta_grid.end());
  curve.D_H.reserve(eta_grid.size());
  curve.D_S.reserve(eta_grid.size());
  for (double eta : eta_grid) {
    if (!(eta > 0.0)) throw DomainError("bifurcation_curves: eta must be > 0");
    curve.D_H.push_back(B.trace() / eta - d);
    curve.D_S.push_back((p * eta - B.det()) / (d * eta * eta - B.m00 * eta));
  }
  return curve;
}

BifurcationCurve bifurcation_curves(const Kinetics& kin, const Motility& mot, const Equilibrium& eq,
                                    std::span<const double> eta_grid) {
  // Neither curve depends on the D stored in the linearization.
  return bifurcation_curves(linearize(kin, mot, 1.0, eq), eta_grid);
}

std::optional<Band> steady_band(const BetaCoefficients& beta, double D, double d_star) {
  if (!(D > 0.0) || !(d_star > 0.0)) throw DomainError("steady_band: D and d* must be > 0");
  const double Lambda = beta.beta2 * beta.beta2 - 4.0 * beta.beta3 * D * d_star;
  if (!(beta.beta2 > 0.0) || !(Lambda > 0.0)) return std::nullopt;

  const double q = 0.5 * (beta.beta2 + std::sqrt(Lambda));
  Band band{beta.beta3 / q, q / (D * d_star)};
  if (band.lower > band.upper) std::swap(band.lower, band.upper);

  const double mid = 0.5 * (band.lower + band.upper);
  const double b_mid = d_star * D * mid * mid - beta.beta2 * mid + beta.beta3;
  if (!(b_mid < 0.0)) throw std::logic_error("steady_band: b(D, k^2) is not negative inside the band");
  return band;
}

std::optional<Band> hopf_band(const BetaCoefficients& beta, double D, double d_star) {
  const double P = (D - d_star) * (D - d_star);
  const double Q = (D + d_star) * beta.beta1 - 2.0 * beta.beta2;
  const double R = beta.beta1 * beta.beta1 - 4.0 * beta.beta3;
  auto disc_at = [&](double eta) { return P * eta * eta - 2.0 * Q * eta + R; };
  constexpr double inf = std::numeric_limits<double>::infinity();

  std::optional<Band> band;
  if (P == 0.0) {
    // Linear in eta: -2 Q eta + R < 0.
    if (Q > 0.0) {
      band = Band{std::max(0.0, R / (2.0 * Q)), inf};
    } else if (Q < 0.0) {
      if (R / (2.0 * Q) > 0.0) band = Band{0.0, R / (2.0 * Q)};
    } else if (R < 0.0) {
      band = Band{0.0, inf};
    }
  } else {
    const double disc = Q * Q - P * R;
    if (!(disc > 0.0)) return std::nullopt;
    const double q = Q + std::copysign(std::sqrt(disc), Q);
    double r1 = q / P;
    double r2 = q != 0.0 ? R / q : 0.0;
    if (r1 > r2) std::swap(r1, r2);
    if (r2 > 0.0) band = Band{std::max(0.0, r1), r2};
  }
  if (!band) return std::nullopt;

  const double probe = std::isfinite(band->upper) ? 0.5 * (band->lower + band->upper)
                                                   : band->lower + 1.0;
  if (!(disc_at(probe) < 0.0)) {
    throw std::logic_error("hopf_band: discriminant is not negative inside the band");
  }
  return band;
}

std::optional<double> steady_threshold_D(const BetaCoefficients& beta, double d_star) {
  if (!(beta.beta2 > 0.0) || !(beta.beta3 > 0.0) || !(d_star > 0.0)) return std::nullopt;
  auto Lambda = [&](double D) { return beta.beta2 * beta.beta2 - 4.0 * beta.beta3 * D * d_star; };
  double lo = 0.0;
  double hi = 1.0;
  while (Lambda(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (Lambda(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

namespace {

// Largest eta where a(D, eta) < 0 or b(D, eta) < 0; zero when no such eta exists.
double instability_extent(const LinearizedSystem& sys) {
  const double d = sys.A.m00;
  const double u_chi = -sys.A.m01;
  const Mat2& B = sys.B;
  double eta_max = 0.0;
  eta_max = std::max(eta_max, B.trace() / (d + sys.D));

  const double qa = d * sys.D;
  const double qb = d * B.m11 + u_chi * B.m10 + B.m00 * sys.D;
  const double disc = qb * qb - 4.0 * qa * B.det();
  if (disc > 0.0) eta_max = std::max(eta_max, (qb + std::sqrt(disc)) / (2.0 * qa));
  return eta_max;
}

}  // namespace

int mode_cutoff(const LinearizedSystem& sys, double ell) {
  if (!(ell > 0.0)) throw DomainError("mode_cutoff: ell must be > 0");
  const double eta_max = instability_extent(sys);
  const int first_beyond = static_cast<int>(std::floor(ell * std::sqrt(eta_max) / std::numbers::pi)) + 1;
  return first_beyond + 2;
}

std::vector<ModeInfo> mode_spectrum(const LinearizedSystem& sys, double ell, int n_max) {
  if (!(ell > 0.0)) throw DomainError("mode_spectrum: ell must be > 0");
  std::vector<ModeInfo> modes;
  modes.reserve(static_cast<std::size_t>(std::max(0, n_max + 1)));
  for (int n = 0; n <= n_max; ++n) {
    const double k = n * std::numbers::pi / ell;
    modes.push_back({n, k, dispersion(sys, k)});
  }
  return modes;
}

std::vector<ModeInfo> unstable_modes(const LinearizedSystem& sys, double ell) {
  std::vector<ModeInfo> out;
  for (const ModeInfo& m : mode_spectrum(sys, ell, mode_cutoff(sys, ell))) {
    if (m.point.klass != ModeClass::Stable) out.push_back(m);
  }
  return out;
}

std::vector<ModeInfo> unstable_modes(const Kinetics& kin, const Motility& mot, double D,
                                     const Equilibrium& eq, double ell) {
  return unstable_modes(linearize(kin, mot, D, eq), ell);
}

StabilizingD min_stabilizing_D(const Kinetics& kin, const Motility& mot, const Equilibrium& eq,
                               double ell) {
  if (!(ell > 0.0)) throw DomainError("min_stabilizing_D: ell must be > 0");
  const LinearizedSystem sys = linearize(kin, mot, 1.0, eq);
  const Mat2& B = sys.B;

  StabilizingD out;
  // a(D, 0) = -tr B and b(D, 0) = det B do not depend on D.
  if (B.trace() > kMarginalTolerance || B.det() < -kMarginalTolerance) {
    out.homogeneous_mode_unstable = true;
    return out;
  }

  const double d = sys.A.m00;
  const double u_chi = -sys.A.m01;
  const double p = d * B.m11 + u_chi * B.m10;
  const double scale = 1.0 + std::abs(B.trace()) + std::abs(p) / d + std::sqrt(std::abs(B.det()) / d) +
                       std::abs(B.m00) / d;
  const double eta_stop = 1e4 * scale;
  const double step = std::numbers::pi / ell;
  const long n_stop = std::min<long>(10'000'000, static_cast<long>(std::ceil(std::sqrt(eta_stop) / step)) + 1);

  // Both curves tend to finite limits (-d and 0) as eta grows, so the supremum is at least 0.
  double sup = 0.0;
  for (long n = 1; n <= n_stop; ++n) {
    const double eta = (n * step) * (n * step);
    const double dh = B.trace() / eta - d;
    const double ds = (p * eta - B.det()) / (d * eta * eta - B.m00 * eta);
    sup = std::max({sup, dh, ds});
  }
  out.d_min = sup;
  return out;
}

}  // namespace preytaxis
