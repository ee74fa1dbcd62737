#include "preytaxis/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "preytaxis/diagnostics.hpp"

namespace preytaxis {

Grid1D::Grid1D(double length, int cells) : ell(length), n_cells(cells) {
  if (!(std::isfinite(length) && length > 0.0)) throw ValidationError("grid: length must be > 0");
  if (cells < 8) throw ValidationError("grid: n_cells must be >= 8");
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::ExplicitRK4 ? "rk4" : "imex";
}

SolverConfig::SolverConfig(Kinetics kinetics, Motility motility, double prey_diffusivity, Grid1D grid_)
    : kin(std::move(kinetics)), mot(std::move(motility)), D(prey_diffusivity), grid(grid_) {}

void SolverConfig::set_homogeneous_base(double u, double v) {
  base_u.assign(static_cast<std::size_t>(grid.n_cells), u);
  base_v.assign(static_cast<std::size_t>(grid.n_cells), v);
}

void SolverConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("invalid solver config: " + what);
  };
  require(std::isfinite(D) && D > 0.0, "D must be > 0");
  require(cfl_safety > 0.0 && cfl_safety <= 1.0, "cfl_safety must lie in (0, 1]");
  require(std::isfinite(t_end) && t_end > 0.0, "t_end must be > 0");
  require(output_count >= 1, "output_count must be >= 1");
  require(perturbation.epsilon >= 0.0, "epsilon must be >= 0");
  require(imex_dt_max > 0.0, "imex_dt_max must be > 0");
  const auto n = static_cast<std::size_t>(grid.n_cells);
  require(base_u.size() == n && base_v.size() == n, "base state must have one value per cell");
  for (std::size_t i = 0; i < n; ++i) {
    require(std::isfinite(base_u[i]) && base_u[i] >= 0.0, "base u must be finite and >= 0");
    require(std::isfinite(base_v[i]) && base_v[i] >= 0.0, "base v must be finite and >= 0");
  }
  for (double ts : snapshot_times) require(ts >= 0.0 && ts <= t_end, "snapshot times must lie in [0, t_end]");
}

namespace {

// Uniform on [-1, 1] from the top 53 bits, independent of the standard library's distributions.
double draw_symmetric(std::mt19937_64& gen) {
  return 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
}

void perturb(std::vector<double>& field, const std::vector<double>& base, const Perturbation& p,
             double K, std::mt19937_64& gen, const char* name) {
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double xi = draw_symmetric(gen);
    if (p.epsilon == 0.0) {
      field[i] = base[i];
      continue;
    }
    bool additive = p.mode == PerturbationMode::Additive;
    if (p.mode == PerturbationMode::Auto) additive = base[i] == 0.0;
    if (p.mode == PerturbationMode::Multiplicative && base[i] == 0.0) {
      throw ValidationError(std::string("init_state: multiplicative perturbation of a zero ") + name +
                            " component");
    }
    field[i] = additive ? base[i] + p.epsilon * K * 0.5 * (1.0 + xi) : base[i] * (1.0 + p.epsilon * xi);
  }
}

class Transport {
 public:
  explicit Transport(const SolverConfig& cfg)
      : cfg_(cfg), n_(static_cast<std::size_t>(cfg.grid.n_cells)), h_(cfg.grid.h()),
        flux_u_(n_ + 1, 0.0), flux_v_(n_ + 1, 0.0), d_face_(n_ + 1, 0.0) {}

  // Full right-hand side.
  void full(const double* u, const double* v, double* du, double* dv) {
    const double inv_h = 1.0 / h_;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      const MotilityValues m = cfg_.mot.eval(0.5 * (v[i] + v[i + 1]));
      const double uf = 0.5 * (u[i] + u[i + 1]);
      const double gu = (u[i + 1] - u[i]) * inv_h;
      const double gv = (v[i + 1] - v[i]) * inv_h;
      flux_u_[i + 1] = m.d * gu - uf * m.chi * gv;
      flux_v_[i + 1] = cfg_.D * gv;
    }
    finish(u, v, du, dv);
  }

  // Taxis and reactions only; diffusion is handled implicitly.
  void explicit_part(const double* u, const double* v, double* du, double* dv) {
    const double inv_h = 1.0 / h_;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      const double chi = cfg_.mot.chi(0.5 * (v[i] + v[i + 1]));
      const double uf = 0.5 * (u[i] + u[i + 1]);
      flux_u_[i + 1] = -uf * chi * (v[i + 1] - v[i]) * inv_h;
      flux_v_[i + 1] = 0.0;
    }
    finish(u, v, du, dv);
  }

  // Face motilities d(v_f) at the given prey field, for the implicit diffusion operator.
  const std::vector<double>& face_motility(const double* v) {
    for (std::size_t i = 0; i + 1 < n_; ++i) d_face_[i + 1] = cfg_.mot.d(0.5 * (v[i] + v[i + 1]));
    return d_face_;
  }

 private:
  void finish(const double* u, const double* v, double* du, double* dv) const {
    const double inv_h = 1.0 / h_;
    for (std::size_t i = 0; i < n_; ++i) {
      du[i] = (flux_u_[i + 1] - flux_u_[i]) * inv_h;
      dv[i] = (flux_v_[i + 1] - flux_v_[i]) * inv_h;
    }
    if (!cfg_.reactions) return;
    for (std::size_t i = 0; i < n_; ++i) {
      const ReactionRates r = eval_reaction_unchecked(cfg_.kin, u[i], v[i]);
      du[i] += r.du;
      dv[i] += r.dv;
    }
  }

  const SolverConfig& cfg_;
  std::size_t n_;
  double h_;
  // Face j sits between cells j-1 and j; faces 0 and n are the zero-flux boundaries.
  std::vector<double> flux_u_;
  std::vector<double> flux_v_;
  std::vector<double> d_face_;
};

// Solves (I - c L) x = rhs for the Neumann diffusion operator L with face coefficients
// coef[1..n-1] (coef[0] and coef[n] are the closed boundaries). Thomas algorithm.
class DiffusionSolve {
 public:
  explicit DiffusionSolve(std::size_t n) : n_(n), lower_(n), diag_(n), upper_(n), scratch_(n) {}

  void factor(const std::vector<double>& coef, double c_over_h2) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double left = i > 0 ? coef[i] : 0.0;
      const double right = i + 1 < n_ ? coef[i + 1] : 0.0;
      lower_[i] = -c_over_h2 * left;
      upper_[i] = -c_over_h2 * right;
      diag_[i] = 1.0 + c_over_h2 * (left + right);
    }
  }

  void solve(const double* rhs, double* x) {
    scratch_[0] = upper_[0] / diag_[0];
    x[0] = rhs[0] / diag_[0];
    for (std::size_t i = 1; i < n_; ++i) {
      const double m = diag_[i] - lower_[i] * scratch_[i - 1];
      scratch_[i] = upper_[i] / m;
      x[i] = (rhs[i] - lower_[i] * x[i - 1]) / m;
    }
    for (std::size_t i = n_ - 1; i-- > 0;) x[i] -= scratch_[i] * x[i + 1];
  }

 private:
  std::size_t n_;
  std::vector<double> lower_, diag_, upper_, scratch_;
};

class Stepper {
 public:
  explicit Stepper(const SolverConfig& cfg)
      : cfg_(cfg), n_(static_cast<std::size_t>(cfg.grid.n_cells)), transport_(cfg), solve_u_(n_),
        solve_v_(n_) {
    for (auto* w : {&k1u_, &k1v_, &k2u_, &k2v_, &k3u_, &k3v_, &k4u_, &k4v_, &tu_, &tv_}) w->resize(n_);
    v_coef_.assign(n_ + 1, cfg.D);
  }

  void step(State& s, double dt) {
    if (cfg_.scheme == Scheme::ExplicitRK4) {
      rk4(s, dt);
    } else {
      imex(s, dt);
    }
    s.t += dt;
  }

 private:
  void rk4(State& s, double dt) {
    double* u = s.u.data();
    double* v = s.v.data();
    transport_.full(u, v, k1u_.data(), k1v_.data());
    axpy(u, v, 0.5 * dt, k1u_, k1v_);
    transport_.full(tu_.data(), tv_.data(), k2u_.data(), k2v_.data());
    axpy(u, v, 0.5 * dt, k2u_, k2v_);
    transport_.full(tu_.data(), tv_.data(), k3u_.data(), k3v_.data());
    axpy(u, v, dt, k3u_, k3v_);
    transport_.full(tu_.data(), tv_.data(), k4u_.data(), k4v_.data());
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n_; ++i) {
      u[i] += w * (k1u_[i] + 2.0 * k2u_[i] + 2.0 * k3u_[i] + k4u_[i]);
      v[i] += w * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
    }
  }

  // ARS(2,2,2): L-stable implicit SDIRK part, explicit taxis and reactions, diffusion
  // coefficients frozen at the start of the step.
  void imex(State& s, double dt) {
    static const double g = 1.0 - 1.0 / std::sqrt(2.0);
    static const double delta = 1.0 - 1.0 / (2.0 * g);
    const double h2 = cfg_.grid.h() * cfg_.grid.h();
    double* u = s.u.data();
    double* v = s.v.data();

    const std::vector<double>& d_face = transport_.face_motility(v);
    solve_u_.factor(d_face, g * dt / h2);
    solve_v_.factor(v_coef_, g * dt / h2);

    // Stage 2.
    transport_.explicit_part(u, v, k1u_.data(), k1v_.data());
    for (std::size_t i = 0; i < n_; ++i) {
      tu_[i] = u[i] + g * dt * k1u_[i];
      tv_[i] = v[i] + g * dt * k1v_[i];
    }
    solve_u_.solve(tu_.data(), k2u_.data());
    solve_v_.solve(tv_.data(), k2v_.data());

    // Stage 3 from Y2 = (k2u, k2v).
    transport_.explicit_part(k2u_.data(), k2v_.data(), k3u_.data(), k3v_.data());
    apply_diffusion(d_face, k2u_, k4u_);
    apply_diffusion(v_coef_, k2v_, k4v_);
    for (std::size_t i = 0; i < n_; ++i) {
      tu_[i] = u[i] + dt * (delta * k1u_[i] + (1.0 - delta) * k3u_[i]) + dt * (1.0 - g) * k4u_[i];
      tv_[i] = v[i] + dt * (delta * k1v_[i] + (1.0 - delta) * k3v_[i]) + dt * (1.0 - g) * k4v_[i];
    }
    solve_u_.solve(tu_.data(), u);
    solve_v_.solve(tv_.data(), v);
  }

  void apply_diffusion(const std::vector<double>& coef, const std::vector<double>& x,
                       std::vector<double>& out) const {
    const double inv_h2 = 1.0 / (cfg_.grid.h() * cfg_.grid.h());
    for (std::size_t i = 0; i < n_; ++i) {
      const double left = i > 0 ? coef[i] * (x[i - 1] - x[i]) : 0.0;
      const double right = i + 1 < n_ ? coef[i + 1] * (x[i + 1] - x[i]) : 0.0;
      out[i] = (left + right) * inv_h2;
    }
  }

  void axpy(const double* u, const double* v, double a, const std::vector<double>& ku,
            const std::vector<double>& kv) {
    for (std::size_t i = 0; i < n_; ++i) {
      tu_[i] = u[i] + a * ku[i];
      tv_[i] = v[i] + a * kv[i];
    }
  }

  const SolverConfig& cfg_;
  std::size_t n_;
  Transport transport_;
  DiffusionSolve solve_u_;
  DiffusionSolve solve_v_;
  std::vector<double> v_coef_;
  std::vector<double> k1u_, k1v_, k2u_, k2v_, k3u_, k3v_, k4u_, k4v_, tu_, tv_;
};

double max_taxis_speed(const State& s, const SolverConfig& cfg) {
  const double inv_h = 1.0 / cfg.grid.h();
  double w = 0.0;
  for (std::size_t i = 0; i + 1 < s.v.size(); ++i) {
    const double chi = cfg.mot.chi(0.5 * (s.v[i] + s.v[i + 1]));
    w = std::max(w, std::abs(chi * (s.v[i + 1] - s.v[i]) * inv_h));
  }
  return w;
}

double output_interval(const SolverConfig& cfg) { return cfg.t_end / cfg.output_count; }

double imex_dt(const State& s, const SolverConfig& cfg) {
  const double h = cfg.grid.h();
  const double adv = cfg.cfl_safety * h / (max_taxis_speed(s, cfg) + 1e-300);
  return std::min({adv, cfg.imex_dt_max, output_interval(cfg)});
}

std::string describe(double t, const char* what) {
  std::ostringstream os;
  os.precision(17);
  os << what << " at t=" << t;
  return os.str();
}

}  // namespace

State init_state(const SolverConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.grid.n_cells);
  State s;
  s.u.resize(n);
  s.v.resize(n);
  std::mt19937_64 gen(cfg.perturbation.seed);
  perturb(s.u, cfg.base_u, cfg.perturbation, cfg.kin.K(), gen, "u");
  perturb(s.v, cfg.base_v, cfg.perturbation, cfg.kin.K(), gen, "v");
  return s;
}

Derivative rhs(const State& state, const SolverConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.grid.n_cells);
  if (state.u.size() != n || state.v.size() != n) throw DomainError("rhs: state size does not match the grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(state.u[i]) || !std::isfinite(state.v[i])) throw DomainError("rhs: non-finite state");
  }
  Derivative out{std::vector<double>(n), std::vector<double>(n)};
  Transport(cfg).full(state.u.data(), state.v.data(), out.du.data(), out.dv.data());
  return out;
}

double stable_dt(const State& state, const SolverConfig& cfg) {
  const double h = cfg.grid.h();
  double d_max = 0.0;
  for (double v : state.v) d_max = std::max(d_max, cfg.mot.d(v));
  const double diffusive = h * h / (2.0 * std::max(d_max, cfg.D));
  const double advective = h / (max_taxis_speed(state, cfg) + 1e-300);
  return std::min(cfg.cfl_safety * std::min(diffusive, advective), output_interval(cfg));
}

TimeseriesRow measure(const State& state, const SolverConfig& cfg,
                      const std::optional<Equilibrium>& coexistence) {
  const double h = cfg.grid.h();
  const auto n = static_cast<double>(state.u.size());
  TimeseriesRow row;
  row.t = state.t;
  row.min_u = row.max_u = state.u.front();
  row.min_v = row.max_v = state.v.front();
  double su = 0.0, sv = 0.0, du2 = 0.0, dv2 = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    const double u = state.u[i];
    const double v = state.v[i];
    su += u;
    sv += v;
    row.min_u = std::min(row.min_u, u);
    row.max_u = std::max(row.max_u, u);
    row.min_v = std::min(row.min_v, v);
    row.max_v = std::max(row.max_v, v);
    du2 += (u - cfg.base_u[i]) * (u - cfg.base_u[i]);
    dv2 += (v - cfg.base_v[i]) * (v - cfg.base_v[i]);
  }
  row.mass_u = h * su;
  row.mass_v = h * sv;
  row.l2_dev_u = std::sqrt(h * du2);
  row.l2_dev_v = std::sqrt(h * dv2);
  const double mean_u = su / n;
  const double mean_v = sv / n;
  double var_u = 0.0, var_v = 0.0;
  for (std::size_t i = 0; i < state.u.size(); ++i) {
    var_u += (state.u[i] - mean_u) * (state.u[i] - mean_u);
    var_v += (state.v[i] - mean_v) * (state.v[i] - mean_v);
  }
  row.std_u = std::sqrt(var_u / n);
  row.std_v = std::sqrt(var_v / n);

  if (cfg.record_lyapunov && row.min_v > 0.0) {
    row.V1 = lyapunov_v1(state, cfg.grid, cfg.kin);
    if (coexistence && row.min_u > 0.0) row.V2 = lyapunov_v2(state, cfg.grid, cfg.kin, *coexistence);
  }
  return row;
}

Trajectory integrate(const SolverConfig& cfg) {
  cfg.validate();

  Trajectory traj;
  traj.grid = cfg.grid;
  if (!(cfg.kin.alpha() > 0.0 || cfg.mot.chi_is_minus_dprime())) {
    traj.warnings.emplace_back(
        "boundedness is only guaranteed for alpha > 0 or chi = -d'; running anyway");
  }
  const std::optional<Equilibrium> coexistence = compute_equilibria(cfg.kin).coexistence;

  // Event times: timeseries outputs and snapshots, merged.
  struct Event {
    double t;
    bool output;
    bool snapshot;
  };
  std::vector<Event> events;
  for (int k = 0; k <= cfg.output_count; ++k) {
    events.push_back({k == cfg.output_count ? cfg.t_end : cfg.t_end * k / cfg.output_count, true, false});
  }
  std::vector<double> snaps = cfg.snapshot_times;
  if (snaps.empty()) {
    constexpr int default_snapshots = 200;
    for (int k = 0; k < default_snapshots; ++k) snaps.push_back(cfg.t_end * k / (default_snapshots - 1));
  }
  const double merge_tol = 1e-12 * cfg.t_end;
  for (double ts : snaps) {
    auto it = std::find_if(events.begin(), events.end(),
                           [&](const Event& e) { return std::abs(e.t - ts) <= merge_tol; });
    if (it != events.end()) {
      it->snapshot = true;
    } else {
      events.push_back({ts, false, true});
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

  State s = init_state(cfg);
  Stepper stepper(cfg);
  auto choose_dt = [&] { return cfg.scheme == Scheme::ExplicitRK4 ? stable_dt(s, cfg) : imex_dt(s, cfg); };
  double dt = choose_dt();

  auto record = [&](const Event& e) {
    if (e.output) traj.timeseries.push_back(measure(s, cfg, coexistence));
    if (e.snapshot) traj.snapshots.push_back(s);
  };
  auto fail = [&](bool blowup, const std::string& what) {
    traj.snapshots.push_back(s);
    try {
      traj.timeseries.push_back(measure(s, cfg, coexistence));
    } catch (const Error&) {
      // Lyapunov values are undefined on a broken state; keep what we have.
    }
    if (blowup) throw BlowUpError(describe(s.t, what.c_str()), std::move(traj));
    throw NonPhysicalError(describe(s.t, what.c_str()), std::move(traj));
  };

  for (const Event& e : events) {
    while (s.t < e.t - merge_tol) {
      stepper.step(s, std::min(dt, e.t - s.t));
      ++traj.steps;
      double lo = 0.0;
      for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double u = s.u[i];
        const double v = s.v[i];
        if (!std::isfinite(u) || !std::isfinite(v) || std::abs(u) > kBlowUpThreshold ||
            std::abs(v) > kBlowUpThreshold) {
          fail(true, "field non-finite or above 1e6");
        }
        lo = std::min({lo, u, v});
      }
      if (lo < kNegativityThreshold) fail(false, "negative density below -1e-8");
    }
    s.t = e.t;
    record(e);
    if (e.output) dt = choose_dt();
  }
  return traj;
}

}  // namespace preytaxis
