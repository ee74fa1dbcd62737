#include <doctest.h>

#include <cmath>
#include <random>

#include "preytaxis/errors.hpp"
#include "preytaxis/model.hpp"

using namespace preytaxis;

namespace {

KineticsParams cp_params() { return KineticsParams{}; }

double central_diff(const std::function<double(double)>& g, double x, double h = 1e-5) {
  return (g(x + h) - g(x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("default parameters are the reference block") {
  const KineticsParams p;
  CHECK(p.K == 4.0);
  CHECK(p.gamma == 2.0);
  CHECK(p.theta == 1.0);
  CHECK(p.lambda == 1.0);
  CHECK(p.mu == 1.0);
  CHECK(p.alpha == 0.0);
}

TEST_CASE("kinetics validation rejects non-positive parameters") {
  KineticsParams p;
  p.gamma = 0.0;
  CHECK_THROWS_AS(Kinetics::rosenzweig_macarthur(p), ValidationError);
  p = {};
  p.K = -1.0;
  CHECK_THROWS_AS(Kinetics::lotka_volterra(p), ValidationError);
  p = {};
  p.alpha = -0.1;
  CHECK_THROWS_AS(Kinetics::lotka_volterra(p), ValidationError);
  p = {};
  p.lambda = 0.0;
  CHECK_THROWS_AS(Kinetics::rosenzweig_macarthur(p), ValidationError);
}

TEST_CASE("kinetics derivatives agree with finite differences") {
  const Kinetics lv = Kinetics::lotka_volterra(cp_params());
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  for (const Kinetics* kin : {&lv, &rm}) {
    for (double v : {0.1, 0.5, 1.0, 2.0, 3.7}) {
      CHECK(kin->dF(v) == doctest::Approx(central_diff([&](double x) { return kin->F(x); }, v)).epsilon(1e-8));
      CHECK(kin->df(v) == doctest::Approx(central_diff([&](double x) { return kin->f(x); }, v)).epsilon(1e-8));
      CHECK(kin->dphi(v) ==
            doctest::Approx(central_diff([&](double x) { return kin->phi(x); }, v)).epsilon(1e-7));
    }
  }
}

TEST_CASE("phi extends continuously to zero") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  // f/F = mu (1 - v/K)(lambda + v) -> mu lambda
  CHECK(rm.phi(0.0) == doctest::Approx(1.0));
  CHECK(rm.phi(1e-9) == doctest::Approx(1.0).epsilon(1e-8));
  const Kinetics lv = Kinetics::lotka_volterra(cp_params());
  CHECK(lv.phi(0.0) == doctest::Approx(1.0));
}

TEST_CASE("motility builtins: values at v = 1 and chi = -d'") {
  // d1(1) = d2(1) = 1/2, d3(1) = 1/10; chi1 = 1/2, chi2 = 1/40, chi3 = 1/50.
  const Motility m1 = Motility::d1();
  const Motility m2 = Motility::d2();
  const Motility m3 = Motility::d3();
  CHECK(m1.d(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m2.d(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m3.d(1.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(m1.chi(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m2.chi(1.0) == doctest::Approx(1.0 / 40).epsilon(1e-15));
  CHECK(m3.chi(1.0) == doctest::Approx(1.0 / 50).epsilon(1e-15));
  for (const Motility* m : {&m1, &m2, &m3}) {
    CHECK(m->chi_is_minus_dprime());
    for (double v = 0.0; v <= 8.0; v += 0.25) {
      const double fd = central_diff([&](double x) { return m->d(x); }, v);
      CHECK(m->dprime(v) == doctest::Approx(fd).epsilon(1e-8));
      CHECK(m->chi(v) == doctest::Approx(-m->dprime(v)));
      const MotilityValues e = m->eval(v);
      CHECK(e.d == doctest::Approx(m->d(v)));
      CHECK(e.chi == doctest::Approx(m->chi(v)));
    }
  }
}

TEST_CASE("motility stays positive and finite for large prey density") {
  const Motility m1 = Motility::d1();
  const double v = 300.0;
  CHECK(m1.d(v) > 0.0);
  CHECK(std::isfinite(m1.chi(v)));
}

TEST_CASE("constant and custom motility") {
  const Motility c = Motility::constant(0.3, 0.7);
  CHECK(c.d(5.0) == 0.3);
  CHECK(c.chi(5.0) == 0.7);
  CHECK(c.dprime(5.0) == 0.0);
  CHECK_THROWS_AS(Motility::constant(0.0, 1.0), ValidationError);
  const Motility cu = Motility::custom([](double v) { return 1.0 / (1.0 + v); },
                                      [](double v) { return -1.0 / ((1.0 + v) * (1.0 + v)); },
                                      [](double v) { return 1.0 / ((1.0 + v) * (1.0 + v)); }, true);
  CHECK(cu.d(1.0) == doctest::Approx(0.5));
  CHECK(cu.chi(1.0) == doctest::Approx(0.25));
  CHECK(cu.kind() == MotilityKind::Custom);
}

TEST_CASE("eval_reaction rejects negative densities") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  CHECK_THROWS_AS(eval_reaction(rm, -1e-3, 1.0), DomainError);
  CHECK_THROWS_AS(eval_reaction(rm, 1.0, -1e-3), DomainError);
  const ReactionRates r = eval_reaction(rm, 1.5, 1.0);
  CHECK(std::abs(r.du) < 1e-15);
  CHECK(std::abs(r.dv) < 1e-15);
}

TEST_CASE("equilibria for the reference Rosenzweig-MacArthur model") {
  const EquilibriumSet eq = compute_equilibria(Kinetics::rosenzweig_macarthur(cp_params()));
  CHECK(eq.extinction.u == 0.0);
  CHECK(eq.extinction.v == 0.0);
  CHECK(eq.prey_only.u == 0.0);
  CHECK(eq.prey_only.v == 4.0);
  REQUIRE(eq.coexistence);
  CHECK(std::abs(eq.coexistence->u - 1.5) < 1e-10);
  CHECK(std::abs(eq.coexistence->v - 1.0) < 1e-10);
  CHECK(eq.coexistence->residual < 1e-10);
  CHECK(eq.all().size() == 3);
}

TEST_CASE("Lotka-Volterra coexistence closed form with competition") {
  KineticsParams p;
  p.alpha = 0.5;
  const Kinetics lv = Kinetics::lotka_volterra(p);
  const EquilibriumSet eq = compute_equilibria(lv);
  REQUIRE(eq.coexistence);
  // u* = mu (gamma K - theta) / (gamma K + mu alpha), v* = K (mu alpha + theta) / (gamma K + mu alpha)
  CHECK(eq.coexistence->u == doctest::Approx(7.0 / 8.5).epsilon(1e-13));
  CHECK(eq.coexistence->v == doctest::Approx(4.0 * 1.5 / 8.5).epsilon(1e-13));
  CHECK(eq.coexistence->residual < 1e-12);
}

TEST_CASE("no coexistence state when gamma F(K) <= theta") {
  KineticsParams p;
  p.gamma = 1.0;  // F(4) = 4/5, gamma F(K) = 0.8 < 1
  const EquilibriumSet eq = compute_equilibria(Kinetics::rosenzweig_macarthur(p));
  CHECK_FALSE(eq.coexistence);
  CHECK(eq.all().size() == 2);
}

TEST_CASE("bisection agrees with closed forms (property)") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    KineticsParams p;
    p.gamma = 0.5 + 4.0 * U(gen);
    p.theta = 0.1 + 2.0 * U(gen);
    p.mu = 0.2 + 2.0 * U(gen);
    p.K = 0.5 + 6.0 * U(gen);
    p.lambda = 0.2 + 3.0 * U(gen);
    p.alpha = trial % 2 == 0 ? 0.0 : 2.0 * U(gen);
    const Kinetics kin = trial % 4 < 2 ? Kinetics::lotka_volterra(p) : Kinetics::rosenzweig_macarthur(p);
    const EquilibriumSet eq = compute_equilibria(kin);
    const bool exists = p.gamma * kin.F(p.K) > p.theta;
    CHECK(eq.coexistence.has_value() == exists);
    if (!eq.coexistence) continue;
    const Equilibrium b = coexistence_by_bisection(kin);
    CHECK(b.v == doctest::Approx(eq.coexistence->v).epsilon(1e-9));
    CHECK(b.u == doctest::Approx(eq.coexistence->u).epsilon(1e-9));
    CHECK(eq.coexistence->residual < 1e-9);
    CHECK(eq.coexistence->u > 0.0);
    CHECK(eq.coexistence->v < p.K);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("custom kinetics go through bisection") {
  KineticsParams p;
  const Kinetics kin = Kinetics::custom(
      p, CustomKinetics{[](double v) { return v / (1.0 + v); }, [](double v) { return 1.0 / ((1.0 + v) * (1.0 + v)); },
                        [](double v) { return v * (1.0 - v / 4.0); }, [](double v) { return 1.0 - v / 2.0; }});
  const EquilibriumSet eq = compute_equilibria(kin);
  REQUIRE(eq.coexistence);
  CHECK(eq.coexistence->u == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(eq.coexistence->v == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("hypotheses hold for the builtins") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  for (const Motility& m : {Motility::d1(), Motility::d2(), Motility::d3()}) {
    const HypothesisReport r = check_hypotheses(rm, m, 8.0, 1000);
    CHECK(r.h1.status == HypothesisStatus::Holds);
    CHECK(r.h2.status == HypothesisStatus::Holds);
    CHECK(r.h3.status == HypothesisStatus::Holds);
    CHECK(r.n_samples == 1000);
  }
  CHECK_THROWS_AS(check_hypotheses(rm, Motility::d1(), 8.0, 10), DomainError);
}

TEST_CASE("hypothesis violation reports a witness") {
  // d increasing violates d' <= 0.
  const Motility bad = Motility::custom([](double v) { return 1.0 + v; }, [](double) { return 1.0; },
                                       [](double) { return -1.0; }, true);
  const HypothesisReport r = check_hypotheses(Kinetics::rosenzweig_macarthur(cp_params()), bad, 4.0, 200);
  const bool any_fail = r.h1.status == HypothesisStatus::Fails || r.h2.status == HypothesisStatus::Fails;
  CHECK(any_fail);
  const HypothesisCheck& failing = r.h1.status == HypothesisStatus::Fails ? r.h1 : r.h2;
  REQUIRE(failing.witness);
  CHECK(*failing.witness >= 0.0);
  CHECK(*failing.witness <= 4.0);
  CHECK_FALSE(failing.violated.empty());
}

TEST_CASE("H4 for Rosenzweig-MacArthur depends on lambda versus K") {
  // phi = mu (1 - v/K)(lambda + v) is nonincreasing on [0, K] iff lambda >= K.
  KineticsParams p;
  p.lambda = 5.0;
  const HypothesisReport ok = check_hypotheses(Kinetics::rosenzweig_macarthur(p), Motility::d1(), 4.0, 500);
  CHECK(ok.h4.status == HypothesisStatus::Holds);
  const HypothesisReport bad =
      check_hypotheses(Kinetics::rosenzweig_macarthur(cp_params()), Motility::d1(), 4.0, 500);
  CHECK(bad.h4.status == HypothesisStatus::Fails);
}

TEST_CASE("k0_bound") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  CHECK(k0_bound(rm, 1.0) == 4.0);
  CHECK(k0_bound(rm, 6.0) == 6.0);
}

TEST_CASE("global stability threshold matches a brute-force scan") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  const Motility m1 = Motility::d1();
  const StabilityThresholds st = global_stability_report(rm, m1, 0.1, 1.0);
  CHECK(st.regime == StabilityRegime::CoexistenceRegime);
  REQUIRE(st.d_min);
  // Independent oracle: 1e6-point scan of u* F^2 chi^2 / (4 gamma F(v*) F' d) over [0, K].
  double best = 0.0;
  const int n = 1000000;
  for (int j = 0; j <= n; ++j) {
    const double v = 4.0 * j / n;
    const double val = 1.5 * rm.F(v) * rm.F(v) * m1.chi(v) * m1.chi(v) / (4.0 * 2.0 * rm.F(1.0) * rm.dF(v) * m1.d(v));
    best = std::max(best, val);
  }
  CHECK(*st.d_min == doctest::Approx(best).epsilon(1e-9));
  CHECK(*st.d_min >= best);
  // High-precision value of the same maximum.
  CHECK(*st.d_min == doctest::Approx(0.56693689586463835).epsilon(1e-12));
  CHECK(*st.argmax_v == doctest::Approx(1.8536676586550124).epsilon(1e-6));
  CHECK_FALSE(*st.satisfied);
  CHECK(*global_stability_report(rm, m1, 0.6, 1.0).satisfied);
}

TEST_CASE("global stability threshold for d2 and d3") {
  const Kinetics rm = Kinetics::rosenzweig_macarthur(cp_params());
  CHECK(*global_stability_report(rm, Motility::d2(), 1.0, 1.0).d_min ==
        doctest::Approx(0.0084256348693896634).epsilon(1e-10));
  CHECK(*global_stability_report(rm, Motility::d3(), 1.0, 1.0).d_min ==
        doctest::Approx(0.16653371125155822).epsilon(1e-10));
}

TEST_CASE("prey-only regimes") {
  KineticsParams p;
  p.gamma = 1.0;
  const StabilityThresholds exp_regime = global_stability_report(Kinetics::rosenzweig_macarthur(p), Motility::d1(), 1.0, 1.0);
  CHECK(exp_regime.regime == StabilityRegime::PreyOnlyExponential);
  CHECK(exp_regime.gamma_F_K == doctest::Approx(0.8));
  CHECK_FALSE(exp_regime.d_min);

  // gamma F(K) = theta exactly: Lotka-Volterra with gamma K = theta.
  KineticsParams q;
  q.gamma = 0.25;
  q.theta = 1.0;
  q.alpha = 0.5;
  CHECK(global_stability_report(Kinetics::lotka_volterra(q), Motility::d1(), 1.0, 1.0).regime ==
        StabilityRegime::PreyOnlyAlgebraic);
  q.alpha = 0.0;
  CHECK(global_stability_report(Kinetics::lotka_volterra(q), Motility::d1(), 1.0, 1.0).regime ==
        StabilityRegime::PreyOnlyUncertified);
}

TEST_CASE("to_string names") {
  CHECK(to_string(EquilibriumKind::Coexistence) == "coexistence");
  CHECK(to_string(EquilibriumKind::PreyOnly) == "prey_only");
  CHECK(to_string(EquilibriumKind::Extinction) == "extinction");
}
