#include "preytaxis/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "preytaxis/errors.hpp"
#include "preytaxis/quadrature.hpp"

namespace preytaxis {

namespace {

// x - 1 - ln x written in t = x - 1; the series branch avoids cancellation near t = 0.
double relative_entropy_term(double t) {
  if (std::abs(t) < 1e-2) {
    double term = t * t;
    double sum = 0.0;
    for (int n = 2; n <= 10; ++n) {
      sum += (n % 2 == 0 ? 1.0 : -1.0) * term / n;
      term *= t;
    }
    return sum;
  }
  return t - std::log1p(t);
}

void require_positive(std::span<const double> values, const char* what) {
  for (double x : values) {
    if (!(x > 0.0)) throw DomainError(std::string(what) + " must be > 0 in every cell");
  }
}

}  // namespace

double zeta(const Kinetics& kin, double omega, double v) {
  if (!(omega > 0.0)) throw DomainError("zeta: omega must be > 0");
  if (!(v > 0.0)) throw DomainError("zeta: v must be > 0");
  const double t = (v - omega) / omega;
  switch (kin.kind()) {
    case KineticsKind::LotkaVolterra:
      return omega * relative_entropy_term(t);
    case KineticsKind::RosenzweigMacArthur: {
      const double lambda = kin.lambda();
      return lambda * omega / (lambda + omega) * relative_entropy_term(t);
    }
    case KineticsKind::Custom:
      break;
  }
  const double F_omega = kin.F(omega);
  auto integrand = [&](double s) {
    const double Fs = kin.F(s);
    if (Fs == 0.0) throw DomainError("zeta: F vanishes on the integration path");
    return (Fs - F_omega) / Fs;
  };
  return adaptive_simpson(integrand, omega, v, 1e-10);
}

double lyapunov_v1(const State& state, const Grid1D& grid, const Kinetics& kin) {
  require_positive(state.v, "lyapunov_v1: v");
  const double h = grid.h();
  double mass = 0.0;
  double potential = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    mass += state.u[i];
    potential += zeta(kin, kin.K(), state.v[i]);
  }
  return h * (mass / kin.gamma() + potential);
}

double lyapunov_v2(const State& state, const Grid1D& grid, const Kinetics& kin,
                   const Equilibrium& coexistence) {
  require_positive(state.u, "lyapunov_v2: u");
  require_positive(state.v, "lyapunov_v2: v");
  const double us = coexistence.u;
  const double vs = coexistence.v;
  if (!(us > 0.0) || !(vs > 0.0)) throw DomainError("lyapunov_v2: requires a coexistence state");
  const double h = grid.h();
  double predator = 0.0;
  double prey = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    predator += us * relative_entropy_term((state.u[i] - us) / us);
    prey += zeta(kin, vs, state.v[i]);
  }
  return h * (predator / kin.gamma() + prey);
}

ZetaBoundsReport zeta_bounds_check(const Kinetics& kin, double omega, double delta, int n_samples) {
  if (!(omega > 0.0)) throw DomainError("zeta_bounds_check: omega must be > 0");
  if (!(delta > 0.0) || !(delta < omega)) {
    throw DomainError("zeta_bounds_check: delta must lie in (0, omega)");
  }
  if (n_samples < 2) throw DomainError("zeta_bounds_check: n_samples must be >= 2");

  const double ratio = kin.dF(omega) / kin.F(omega);
  ZetaBoundsReport report;
  report.omega = omega;
  report.delta = delta;
  report.n_samples = n_samples;
  report.worst_lower_margin = std::numeric_limits<double>::infinity();
  report.worst_upper_margin = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_samples; ++j) {
    const double v = omega - delta + 2.0 * delta * j / (n_samples - 1);
    const double z = zeta(kin, omega, v);
    const double sq = (v - omega) * (v - omega);
    const double lower_margin = z - 0.25 * ratio * sq;
    const double upper_margin = ratio * sq - z;
    report.worst_lower_margin = std::min(report.worst_lower_margin, lower_margin);
    report.worst_upper_margin = std::min(report.worst_upper_margin, upper_margin);
    if (lower_margin < -1e-14) report.lower_holds = false;
    if (upper_margin < -1e-14) report.upper_holds = false;
  }
  return report;
}

std::string to_string(PatternKind kind) {
  switch (kind) {
    case PatternKind::HomogeneousStationary:
      return "homogeneous_stationary";
    case PatternKind::HomogeneousPeriodic:
      return "homogeneous_periodic";
    case PatternKind::StationaryInhomogeneous:
      return "stationary_inhomogeneous";
    case PatternKind::SpatioTemporal:
      return "spatiotemporal";
  }
  return "unknown";
}

double max_tail_autocorrelation(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - mean;

  auto pearson = [&](std::size_t lag) {
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    double mx = 0.0, my = 0.0;
    const std::size_t m = n - lag;
    for (std::size_t i = 0; i < m; ++i) {
      mx += c[i];
      my += c[i + lag];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double a = c[i] - mx;
      const double b = c[i + lag] - my;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
  };

  // Short lags correlate trivially for any smooth signal; only lags past the first
  // negative correlation count.
  bool past_zero = false;
  double best = 0.0;
  for (std::size_t lag = 1; lag <= n / 2; ++lag) {
    const double r = pearson(lag);
    if (!past_zero) {
      past_zero = r < 0.0;
      continue;
    }
    best = std::max(best, r);
  }
  return best;
}

PatternClass classify_pattern(const Trajectory& traj, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("classify_pattern: tail_fraction must lie in (0, 1]");
  }
  const auto& ts = traj.timeseries;
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(ts.size())));
  if (tail < static_cast<std::size_t>(kMinTailPoints)) {
    throw InsufficientDataError("classify_pattern: tail window holds fewer than 50 output points");
  }
  const std::size_t first = ts.size() - tail;

  PatternClass pc;
  pc.tail_points = static_cast<int>(tail);
  std::vector<double> mass(tail);
  double std_sum = 0.0;
  for (std::size_t i = 0; i < tail; ++i) {
    mass[i] = ts[first + i].mass_u;
    std_sum += ts[first + i].std_u;
  }
  pc.spatial_std_u = std_sum / static_cast<double>(tail);
  const auto [lo, hi] = std::minmax_element(mass.begin(), mass.end());
  pc.oscillation_amplitude = *hi - *lo;
  pc.mean_mass_u = std::accumulate(mass.begin(), mass.end(), 0.0) / static_cast<double>(tail);
  pc.max_autocorrelation = max_tail_autocorrelation(mass);

  pc.inhomogeneous = pc.spatial_std_u > kInhomogeneityThreshold;
  pc.oscillating = pc.oscillation_amplitude > kOscillationThreshold * std::abs(pc.mean_mass_u);
  pc.periodic = pc.oscillating && pc.max_autocorrelation >= kPeriodicityThreshold;

  if (pc.inhomogeneous) {
    pc.kind = pc.oscillating ? PatternKind::SpatioTemporal : PatternKind::StationaryInhomogeneous;
  } else {
    pc.kind = pc.oscillating ? PatternKind::HomogeneousPeriodic : PatternKind::HomogeneousStationary;
  }
  return pc;
}

std::string to_string(DecayVerdict verdict) {
  switch (verdict) {
    case DecayVerdict::Exponential:
      return "exponential";
    case DecayVerdict::Algebraic:
      return "algebraic";
    case DecayVerdict::NoDecay:
      return "no_decay";
  }
  return "unknown";
}

double decay_norm(const TimeseriesRow& row, const Equilibrium& reference) {
  if (reference.kind == EquilibriumKind::Coexistence) {
    return std::max(std::abs(row.max_u - reference.u), std::abs(row.min_u - reference.u));
  }
  return std::max(std::abs(row.max_u), std::abs(row.min_u));
}

namespace {

struct LineFit {
  double slope = 0.0;
  double r_squared = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  if (sxx <= 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace

DecayFit decay_fit(std::span<const TimeseriesRow> rows, const Equilibrium& reference,
                   double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("decay_fit: tail_fraction must lie in (0, 1]");
  }
  const auto tail = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(rows.size())));
  std::vector<double> t, log_t, log_norm;
  for (std::size_t i = rows.size() - tail; i < rows.size(); ++i) {
    const double norm = decay_norm(rows[i], reference);
    if (!(norm > 0.0) || !std::isfinite(std::log(norm))) continue;
    t.push_back(rows[i].t);
    log_t.push_back(std::log1p(rows[i].t));
    log_norm.push_back(std::log(norm));
  }
  if (t.size() < 100) throw InsufficientDataError("decay_fit: fewer than 100 tail points with positive norm");

  const LineFit ex = least_squares(t, log_norm);
  const LineFit al = least_squares(log_t, log_norm);

  DecayFit fit;
  fit.n_points = static_cast<int>(t.size());
  fit.exponential_rate = -ex.slope;
  fit.exponential_r_squared = ex.r_squared;
  fit.algebraic_exponent = -al.slope;
  fit.algebraic_r_squared = al.r_squared;

  constexpr double min_r_squared = 0.99;
  if (ex.r_squared >= al.r_squared && ex.r_squared >= min_r_squared && fit.exponential_rate > 0.0) {
    fit.verdict = DecayVerdict::Exponential;
    fit.rate = fit.exponential_rate;
    fit.r_squared = ex.r_squared;
  } else if (al.r_squared > ex.r_squared && al.r_squared >= min_r_squared && fit.algebraic_exponent > 0.0) {
    fit.verdict = DecayVerdict::Algebraic;
    fit.rate = fit.algebraic_exponent;
    fit.r_squared = al.r_squared;
  } else {
    fit.verdict = DecayVerdict::NoDecay;
    fit.rate = fit.exponential_rate;
    fit.r_squared = ex.r_squared;
  }
  return fit;
}

}  // namespace preytaxis
