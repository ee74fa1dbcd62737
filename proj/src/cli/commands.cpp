#include "preytaxis/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "preytaxis/cli/csv.hpp"
#include "preytaxis/diagnostics.hpp"

namespace preytaxis::cli {

using json = nlohmann::ordered_json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json to_json(const Equilibrium& e) {
  return {{"kind", to_string(e.kind)}, {"u", e.u}, {"v", e.v}, {"residual", e.residual}};
}

json to_json(const HypothesisCheck& h) {
  json j = {{"status", to_string(h.status)}};
  if (h.witness) {
    j["witness"] = *h.witness;
    j["violated"] = h.violated;
  }
  return j;
}

json to_json(const StabilityThresholds& s) {
  json j = {{"regime", to_string(s.regime)}, {"gamma_F_K", s.gamma_F_K}};
  if (s.d_min) j["d_min"] = *s.d_min;
  if (s.argmax_v) j["argmax_v"] = *s.argmax_v;
  if (s.satisfied) j["satisfied"] = *s.satisfied;
  return j;
}

json to_json(const PatternClass& p) {
  return {{"class", to_string(p.kind)},
          {"spatially_inhomogeneous", p.inhomogeneous},
          {"oscillating", p.oscillating},
          {"periodic", p.periodic},
          {"spatial_std_u", p.spatial_std_u},
          {"oscillation_amplitude", p.oscillation_amplitude},
          {"mean_mass_u", p.mean_mass_u},
          {"max_autocorrelation", p.max_autocorrelation},
          {"tail_points", p.tail_points}};
}

json to_json(const DecayFit& f) {
  return {{"verdict", to_string(f.verdict)},
          {"rate", f.rate},
          {"r_squared", f.r_squared},
          {"exponential_rate", f.exponential_rate},
          {"exponential_r_squared", f.exponential_r_squared},
          {"algebraic_exponent", f.algebraic_exponent},
          {"algebraic_r_squared", f.algebraic_r_squared},
          {"n_points", f.n_points}};
}

json to_json(const std::optional<Band>& b) {
  if (!b) return nullptr;
  return {{"lower", b->lower}, {"upper", b->upper}};
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Owns the run directory and the manifest written when the command finishes.
class Run {
 public:
  Run(const CommandOptions& opts, const RunConfig& rc, std::filesystem::path dir)
      : dir_(std::move(dir)), started_(utc_now()) {
    manifest_["tool"] = "preytaxis-lab";
    manifest_["version"] = kToolVersion;
    manifest_["command"] = opts.command;
    json echo = json::object();
    for (const IniEntry& e : rc.entries) echo[e.section][e.key] = e.value;
    manifest_["config"] = std::move(echo);
    manifest_["config_path"] = opts.config.string();
    manifest_["prng"] = {{"name", kPrngName}, {"seed", rc.seed}};
    manifest_["results"] = json::object();
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }
  json& results() { return manifest_["results"]; }

  void write(const std::string& name, const CsvTable& table) {
    table.write(dir_ / name);
    outputs_.push_back({{"file", name}, {"rows", table.rows()}});
  }

  void warn(const std::string& message) { warnings_.push_back(message); }

  int finish(const std::string& status, int code) {
    manifest_["start_time"] = started_;
    manifest_["end_time"] = utc_now();
    manifest_["outputs"] = outputs_;
    manifest_["warnings"] = warnings_;
    manifest_["status"] = status;
    manifest_["exit_code"] = code;
    const auto tmp = dir_ / "manifest.json.tmp";
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << manifest_.dump(2) << '\n';
      if (!out) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, dir_ / "manifest.json");
    return code;
  }

 private:
  std::filesystem::path dir_;
  std::string started_;
  json manifest_;
  json outputs_ = json::array();
  std::vector<std::string> warnings_;
};

struct Context {
  RunConfig rc;
  Kinetics kin;
  Motility mot;
  EquilibriumSet eqs;
};

const Equilibrium& require_coexistence(const Context& ctx) {
  if (!ctx.eqs.coexistence) {
    throw NoEquilibriumError("no coexistence equilibrium: gamma F(K) <= theta");
  }
  return *ctx.eqs.coexistence;
}

std::vector<double> eta_grid(const RunConfig& rc) {
  std::vector<double> eta(static_cast<std::size_t>(rc.eta_count));
  for (int j = 0; j < rc.eta_count; ++j) {
    const double s = static_cast<double>(j) / (rc.eta_count - 1);
    eta[static_cast<std::size_t>(j)] = rc.eta_log ? rc.eta_min * std::pow(rc.eta_max / rc.eta_min, s)
                                                  : rc.eta_min + s * (rc.eta_max - rc.eta_min);
  }
  return eta;
}

std::optional<BetaCoefficients> try_betas(const Context& ctx, const Equilibrium& eq) {
  if (ctx.kin.kind() != KineticsKind::RosenzweigMacArthur || ctx.kin.alpha() != 0.0) return std::nullopt;
  return beta_coefficients(ctx.kin, ctx.mot, eq);
}

int cmd_equilibria(const Context& ctx, Run& run) {
  CsvTable table({"kind", "u", "v", "residual"});
  json list = json::array();
  for (const Equilibrium& e : ctx.eqs.all()) {
    table.add_row({to_string(e.kind), format_number(e.u), format_number(e.v), format_number(e.residual)});
    list.push_back(to_json(e));
  }
  run.write("equilibria.csv", table);
  run.results()["equilibria"] = list;

  const double v_max = 2.0 * ctx.kin.K();
  const HypothesisReport h = check_hypotheses(ctx.kin, ctx.mot, v_max, 2001);
  run.results()["hypotheses"] = {{"v_max", h.v_max},        {"n_samples", h.n_samples},
                                 {"H1", to_json(h.h1)},     {"H2", to_json(h.h2)},
                                 {"H3", to_json(h.h3)},     {"H4", to_json(h.h4)}};
  run.results()["global_stability"] =
      to_json(global_stability_report(ctx.kin, ctx.mot, ctx.rc.D, ctx.kin.K()));
  return run.finish("ok", kExitOk);
}

int cmd_dispersion(const Context& ctx, Run& run) {
  const Equilibrium& eq = require_coexistence(ctx);
  const LinearizedSystem sys = linearize(ctx.kin, ctx.mot, ctx.rc.D, eq);
  const double ell = ctx.rc.analysis_ell();
  const int cutoff = mode_cutoff(sys, ell);
  const int n_max = ctx.rc.n_max.value_or(cutoff);
  const double k_max = ctx.rc.k_max.value_or(cutoff * std::numbers::pi / ell);

  CsvTable disp({"k", "a", "b", "delta", "re_rho1", "im_rho1", "re_rho2", "im_rho2", "class"});
  for (int j = 0; j < ctx.rc.k_count; ++j) {
    const double k = k_max * j / (ctx.rc.k_count - 1);
    const DispersionPoint p = dispersion(sys, k);
    disp.add_row({format_number(k), format_number(p.a), format_number(p.b), format_number(p.delta),
                  format_number(p.rho[0].real()), format_number(p.rho[0].imag()),
                  format_number(p.rho[1].real()), format_number(p.rho[1].imag()), to_string(p.klass)});
  }
  run.write("dispersion.csv", disp);

  CsvTable modes({"n", "k", "class"});
  json unstable = json::array();
  for (const ModeInfo& m : mode_spectrum(sys, ell, n_max)) {
    modes.add_row({std::to_string(m.n), format_number(m.k), to_string(m.point.klass)});
    if (m.point.klass == ModeClass::HopfUnstable || m.point.klass == ModeClass::SteadyUnstable) {
      unstable.push_back({{"n", m.n}, {"class", to_string(m.point.klass)}, {"re_rho", m.point.max_real()}});
    }
  }
  run.write("modes.csv", modes);

  json& r = run.results();
  r["coexistence"] = to_json(eq);
  r["D"] = ctx.rc.D;
  r["ell"] = ell;
  r["n_max"] = n_max;
  r["unstable_modes"] = unstable;
  if (const auto beta = try_betas(ctx, eq)) {
    r["beta"] = {{"beta1", beta->beta1}, {"beta2", beta->beta2}, {"beta3", beta->beta3}};
    r["steady_band_eta"] = to_json(steady_band(*beta, ctx.rc.D, sys.d_s));
    r["hopf_band_eta"] = to_json(hopf_band(*beta, ctx.rc.D, sys.d_s));
  }
  const StabilizingD sd = min_stabilizing_D(ctx.kin, ctx.mot, eq, ell);
  r["homogeneous_mode_unstable"] = sd.homogeneous_mode_unstable;
  r["min_stabilizing_D"] = optional_json(sd.d_min);
  return run.finish("ok", kExitOk);
}

int cmd_bifurcation(const Context& ctx, Run& run) {
  const Equilibrium& eq = require_coexistence(ctx);
  const std::vector<double> eta = eta_grid(ctx.rc);
  const BifurcationCurve curve = bifurcation_curves(ctx.kin, ctx.mot, eq, eta);

  CsvTable table({"eta", "D_H", "D_S"});
  double max_identity = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    table.add_row({format_number(eta[j]), format_number(curve.D_H[j]), format_number(curve.D_S[j])});
    if (std::isfinite(curve.D_S[j]) && curve.D_S[j] > 0.0) {
      const LinearizedSystem sys = linearize(ctx.kin, ctx.mot, curve.D_S[j], eq);
      max_identity = std::max(max_identity, std::abs(dispersion(sys, std::sqrt(eta[j])).b));
    }
  }
  run.write("curves.csv", table);

  json& r = run.results();
  r["coexistence"] = to_json(eq);
  r["identity_check_max_abs_b"] = max_identity;
  r["lambda_threshold_D"] = nullptr;
  if (const auto beta = try_betas(ctx, eq)) {
    r["beta"] = {{"beta1", beta->beta1}, {"beta2", beta->beta2}, {"beta3", beta->beta3}};
    const double d_star = ctx.mot.d(eq.v);
    if (const auto threshold = steady_threshold_D(*beta, d_star)) r["lambda_threshold_D"] = *threshold;
  }
  return run.finish("ok", kExitOk);
}

void write_trajectory(const Trajectory& traj, Run& run) {
  CsvTable ts({"t", "mass_u", "mass_v", "min_u", "max_u", "min_v", "max_v", "l2_dev_u", "l2_dev_v", "V1", "V2"});
  for (const TimeseriesRow& row : traj.timeseries) {
    ts.add_row({format_number(row.t), format_number(row.mass_u), format_number(row.mass_v),
                format_number(row.min_u), format_number(row.max_u), format_number(row.min_v),
                format_number(row.max_v), format_number(row.l2_dev_u), format_number(row.l2_dev_v),
                format_number(row.V1), format_number(row.V2)});
  }
  run.write("timeseries.csv", ts);

  CsvTable snaps({"t", "x", "u", "v"});
  for (const State& s : traj.snapshots) {
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      snaps.add_row({format_number(s.t), format_number(traj.grid.x(static_cast<int>(i))), format_number(s.u[i]),
                     format_number(s.v[i])});
    }
  }
  run.write("snapshots.csv", snaps);

  CsvTable final_state({"x", "u", "v"});
  if (!traj.snapshots.empty()) {
    const State& s = traj.snapshots.back();
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      final_state.add_row({format_number(traj.grid.x(static_cast<int>(i))), format_number(s.u[i]),
                           format_number(s.v[i])});
    }
  }
  run.write("final_state.csv", final_state);
}

void analyse_trajectory(const Context& ctx, const SolverConfig& cfg, const Trajectory& traj, json& r) {
  r["steps"] = traj.steps;
  try {
    r["pattern"] = to_json(classify_pattern(traj));
  } catch (const InsufficientDataError& e) {
    r["pattern"] = {{"error", e.what()}};
  }
  double v0_max = 0.0;
  for (double v : cfg.base_v) v0_max = std::max(v0_max, v);
  v0_max *= 1.0 + cfg.perturbation.epsilon;
  const StabilityThresholds st = global_stability_report(ctx.kin, ctx.mot, cfg.D, v0_max);
  r["global_stability"] = to_json(st);

  std::optional<Equilibrium> reference;
  switch (st.regime) {
    case StabilityRegime::PreyOnlyExponential:
    case StabilityRegime::PreyOnlyAlgebraic:
      reference = ctx.eqs.prey_only;
      break;
    case StabilityRegime::CoexistenceRegime:
      if (st.satisfied.value_or(false)) reference = ctx.eqs.coexistence;
      break;
    case StabilityRegime::PreyOnlyUncertified:
      break;
  }
  if (!reference) return;
  try {
    json fit = to_json(decay_fit(traj.timeseries, *reference));
    fit["reference"] = to_string(reference->kind);
    r["decay"] = fit;
  } catch (const InsufficientDataError& e) {
    r["decay"] = {{"error", e.what()}};
  }
}

int cmd_simulate(const Context& ctx, Run& run) {
  const SolverConfig cfg = make_solver_config(ctx.rc, ctx.kin, ctx.mot, ctx.rc.D);
  json& r = run.results();
  r["D"] = cfg.D;
  r["scheme"] = to_string(cfg.scheme);
  try {
    const Trajectory traj = integrate(cfg);
    for (const auto& w : traj.warnings) run.warn(w);
    write_trajectory(traj, run);
    analyse_trajectory(ctx, cfg, traj, r);
    return run.finish("ok", kExitOk);
  } catch (const BlowUpError& e) {
    write_trajectory(e.partial(), run);
    r["error"] = e.what();
    return run.finish("blowup", kExitBlowUp);
  } catch (const NonPhysicalError& e) {
    write_trajectory(e.partial(), run);
    r["error"] = e.what();
    return run.finish("nonphysical", kExitBlowUp);
  }
}

struct SweepRow {
  double D = 0.0;
  SweepPrediction prediction;
  std::string simulated = "";
  std::string status = "ok";
  int failure_code = kExitOk;
};

SweepRow sweep_point(const Context& ctx, const Equilibrium& eq, double D, bool simulate) {
  SweepRow row;
  row.D = D;
  try {
    const LinearizedSystem sys = linearize(ctx.kin, ctx.mot, D, eq);
    row.prediction = predict_regime(sys, ctx.rc.analysis_ell());
    if (simulate) {
      const SolverConfig cfg = make_solver_config(ctx.rc, ctx.kin, ctx.mot, D);
      row.simulated = to_string(classify_pattern(integrate(cfg)).kind);
    }
  } catch (const BlowUpError&) {
    row.status = "blowup";
    row.failure_code = kExitBlowUp;
  } catch (const NonPhysicalError&) {
    row.status = "nonphysical";
    row.failure_code = kExitBlowUp;
  } catch (const ValidationError& e) {
    row.status = "error: " + sanitize(e.what());
    row.failure_code = kExitValidation;
  } catch (const InsufficientDataError& e) {
    row.status = "error: " + sanitize(e.what());
    row.failure_code = kExitValidation;
  } catch (const std::exception& e) {
    row.status = "error: " + sanitize(e.what());
    row.failure_code = kExitInternal;
  }
  return row;
}

int cmd_sweep(const Context& ctx, Run& run, bool simulate) {
  const Equilibrium& eq = require_coexistence(ctx);
  const std::vector<double> points = ctx.rc.sweep_points();

  std::vector<SweepRow> rows(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) rows[i] = sweep_point(ctx, eq, points[i], simulate);
  };
  const int n_threads = sweep_thread_count(points.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  CsvTable table({"D", "n_unstable_hopf", "n_unstable_steady", "predicted_regime", "simulated_class", "status"});
  int failures = 0;
  for (const SweepRow& row : rows) {
    table.add_row({format_number(row.D), std::to_string(row.prediction.n_unstable_hopf),
                   std::to_string(row.prediction.n_unstable_steady), row.prediction.regime, row.simulated,
                   row.status});
    if (row.failure_code != kExitOk) ++failures;
  }
  run.write("sweep.csv", table);
  run.results()["rows"] = rows.size();
  run.results()["failed_rows"] = failures;
  run.results()["threads"] = n_threads;
  run.results()["simulate"] = simulate;
  if (failures == static_cast<int>(rows.size())) return run.finish("all_rows_failed", rows.front().failure_code);
  return run.finish("ok", kExitOk);
}

}  // namespace

SolverConfig make_solver_config(const RunConfig& rc, const Kinetics& kin, const Motility& mot, double D) {
  SolverConfig cfg(kin, mot, D, make_grid(rc));
  cfg.scheme = rc.scheme;
  cfg.cfl_safety = rc.cfl_safety;
  cfg.t_end = rc.t_end;
  cfg.output_count = rc.output_count;
  cfg.perturbation.epsilon = rc.epsilon;
  cfg.perturbation.seed = rc.seed;
  for (int k = 0; k < rc.snapshot_count; ++k) {
    cfg.snapshot_times.push_back(rc.t_end * k / (rc.snapshot_count - 1));
  }
  const EquilibriumSet eqs = compute_equilibria(kin);
  switch (rc.initial) {
    case InitialState::Coexistence:
      if (!eqs.coexistence) throw NoEquilibriumError("no coexistence equilibrium to start from");
      cfg.set_homogeneous_base(eqs.coexistence->u, eqs.coexistence->v);
      break;
    case InitialState::PreyOnly:
      cfg.set_homogeneous_base(eqs.prey_only.u, eqs.prey_only.v);
      break;
    case InitialState::Explicit:
      cfg.set_homogeneous_base(rc.u0, rc.v0);
      break;
  }
  cfg.validate();
  return cfg;
}

SweepPrediction predict_regime(const LinearizedSystem& sys, double ell) {
  SweepPrediction p;
  bool inhomogeneous_hopf = false;
  for (const ModeInfo& m : unstable_modes(sys, ell)) {
    if (m.point.klass == ModeClass::HopfUnstable) {
      ++p.n_unstable_hopf;
      inhomogeneous_hopf = inhomogeneous_hopf || m.n > 0;
    } else if (m.point.klass == ModeClass::SteadyUnstable) {
      ++p.n_unstable_steady;
    }
  }
  if (p.n_unstable_steady > 0) {
    p.regime = p.n_unstable_hopf > 0 ? "mixed" : "turing";
  } else if (p.n_unstable_hopf > 0) {
    p.regime = inhomogeneous_hopf ? "hopf_inhomogeneous" : "homogeneous_oscillation";
  } else {
    p.regime = "stable";
  }
  return p;
}

int sweep_thread_count(std::size_t rows) {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("PREYTAXIS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) n = static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(rows, 1)));
}

int run_command(const CommandOptions& opts, std::ostream& log) {
  static const std::vector<std::string> commands = {"equilibria", "dispersion", "bifurcation", "simulate",
                                                    "sweep"};
  if (std::find(commands.begin(), commands.end(), opts.command) == commands.end()) {
    log << "error: unknown subcommand '" << opts.command << "'\n";
    return kExitConfig;
  }

  RunConfig rc;
  try {
    rc = load_config(opts.config);
    if (opts.seed) rc.seed = *opts.seed;
    if (opts.out) rc.directory = opts.out->string();
    if (opts.command == "sweep" && rc.sweep_points().size() < 2) {
      throw ConfigError("[sweep] needs at least 2 points");
    }
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::optional<Context> ctx;
  try {
    validate_ranges(rc);
    Kinetics kin = make_kinetics(rc);
    Motility mot = make_motility(rc);
    make_grid(rc);
    EquilibriumSet eqs = compute_equilibria(kin);
    ctx.emplace(Context{rc, std::move(kin), std::move(mot), std::move(eqs)});
  } catch (const Error& e) {
    log << "validation error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    Run run(opts, rc, rc.directory);
    try {
      if (opts.command == "equilibria") return cmd_equilibria(*ctx, run);
      if (opts.command == "dispersion") return cmd_dispersion(*ctx, run);
      if (opts.command == "bifurcation") return cmd_bifurcation(*ctx, run);
      if (opts.command == "simulate") return cmd_simulate(*ctx, run);
      return cmd_sweep(*ctx, run, opts.simulate);
    } catch (const NoEquilibriumError& e) {
      log << "error: " << e.what() << '\n';
      run.results()["error"] = e.what();
      return run.finish("no_equilibrium", kExitNoEquilibrium);
    } catch (const ValidationError& e) {
      log << "validation error: " << e.what() << '\n';
      run.results()["error"] = e.what();
      return run.finish("validation_error", kExitValidation);
    } catch (const DomainError& e) {
      log << "validation error: " << e.what() << '\n';
      run.results()["error"] = e.what();
      return run.finish("validation_error", kExitValidation);
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitInternal;
  }
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Prey-taxis predator-prey laboratory"};
  app.set_version_flag("--version", kToolVersion);
  CommandOptions opts;
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  app.add_option("command", opts.command, "equilibria | dispersion | bifurcation | simulate | sweep")
      ->required()
      ->check(CLI::IsMember({"equilibria", "dispersion", "bifurcation", "simulate", "sweep"}));
  app.add_option("--config", config, "Path to the run configuration")->required();
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides [output] directory)");
  auto* seed_opt = app.add_option("--seed", seed, "Perturbation seed (overrides [solver] seed)");
  app.add_flag("--simulate", opts.simulate, "Sweep: also simulate and classify each point");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  opts.config = config;
  if (*out_opt) opts.out = out;
  if (*seed_opt) opts.seed = seed;
  return run_command(opts, std::cerr);
}

}  // namespace preytaxis::cli
