#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

#include "preytaxis/errors.hpp"
#include "preytaxis/linstab.hpp"

using namespace preytaxis;

namespace {

const Kinetics& rm_cp() {
  static const Kinetics k = Kinetics::rosenzweig_macarthur(KineticsParams{});
  return k;
}

Equilibrium coexistence(const Kinetics& kin) { return *compute_equilibria(kin).coexistence; }

std::vector<int> unstable_indices(const Motility& mot, double D, double ell) {
  std::vector<int> out;
  for (const ModeInfo& m : unstable_modes(rm_cp(), mot, D, coexistence(rm_cp()), ell)) {
    if (m.point.klass == ModeClass::HopfUnstable || m.point.klass == ModeClass::SteadyUnstable) out.push_back(m.n);
  }
  return out;
}

// Eigenvalues of the 2x2 mode matrix by Eigen's general eigensolver.
std::array<std::complex<double>, 2> eigen_roots(const Mat2& m) {
  Eigen::Matrix2d M;
  M << m.m00, m.m01, m.m10, m.m11;
  Eigen::EigenSolver<Eigen::Matrix2d> es(M, false);
  std::array<std::complex<double>, 2> r{es.eigenvalues()[0], es.eigenvalues()[1]};
  if (r[1].real() > r[0].real()) std::swap(r[0], r[1]);
  return r;
}

}  // namespace

TEST_CASE("reaction Jacobian matches finite differences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    KineticsParams p;
    p.gamma = 1.5 + 3.0 * U(gen);
    p.theta = 0.2 + U(gen);
    p.K = 1.0 + 5.0 * U(gen);
    p.lambda = 0.2 + 2.0 * U(gen);
    p.alpha = trial % 2 ? U(gen) : 0.0;
    const Kinetics kin = trial % 3 ? Kinetics::rosenzweig_macarthur(p) : Kinetics::lotka_volterra(p);
    const auto eqs = compute_equilibria(kin);
    if (!eqs.coexistence) continue;
    const Equilibrium& e = *eqs.coexistence;
    const LinearizedSystem sys = linearize(kin, Motility::d1(), 0.3, e);
    const double h = 1e-6;
    auto R = [&](double u, double v) { return eval_reaction(kin, u, v); };
    const double B1 = (R(e.u + h, e.v).du - R(e.u - h, e.v).du) / (2 * h);
    const double B2 = (R(e.u, e.v + h).du - R(e.u, e.v - h).du) / (2 * h);
    const double B3 = (R(e.u + h, e.v).dv - R(e.u - h, e.v).dv) / (2 * h);
    const double B4 = (R(e.u, e.v + h).dv - R(e.u, e.v - h).dv) / (2 * h);
    CHECK(sys.B.m00 == doctest::Approx(B1).epsilon(1e-7).scale(1.0));
    CHECK(sys.B.m01 == doctest::Approx(B2).epsilon(1e-7).scale(1.0));
    CHECK(sys.B.m10 == doctest::Approx(B3).epsilon(1e-7).scale(1.0));
    CHECK(sys.B.m11 == doctest::Approx(B4).epsilon(1e-7).scale(1.0));
  }
}

TEST_CASE("linearize requires an equilibrium") {
  Equilibrium bogus{1.0, 1.0, EquilibriumKind::Coexistence, 0.0};
  CHECK_THROWS_AS(linearize(rm_cp(), Motility::d1(), 0.1, bogus), DomainError);
}

TEST_CASE("beta coefficients for the three motilities") {
  const Equilibrium e = coexistence(rm_cp());
  const BetaCoefficients b1 = beta_coefficients(rm_cp(), Motility::d1(), e);
  CHECK(std::abs(b1.beta1 - 1.0 / 8) < 1e-12);
  CHECK(std::abs(b1.beta2 + 5.0 / 16) < 1e-12);
  CHECK(std::abs(b1.beta3 - 3.0 / 8) < 1e-12);
  CHECK(std::abs(beta_coefficients(rm_cp(), Motility::d2(), e).beta2 - 7.0 / 160) < 1e-12);
  CHECK(std::abs(beta_coefficients(rm_cp(), Motility::d3(), e).beta2 + 1.0 / 400) < 1e-12);
}

TEST_CASE("beta coefficients reproduce the generic a and b") {
  const Equilibrium e = coexistence(rm_cp());
  for (const Motility& m : {Motility::d1(), Motility::d2(), Motility::d3()}) {
    const BetaCoefficients beta = beta_coefficients(rm_cp(), m, e);
    for (double D : {1e-3, 0.1, 2.0}) {
      const LinearizedSystem sys = linearize(rm_cp(), m, D, e);
      const double ds = m.d(e.v);
      for (double k : {0.0, 0.3, 1.0, 4.0}) {
        const DispersionPoint p = dispersion(sys, k);
        const double eta = k * k;
        CHECK(p.a == doctest::Approx((ds + D) * eta - beta.beta1).scale(1.0).epsilon(1e-13));
        CHECK(p.b == doctest::Approx(ds * D * eta * eta - beta.beta2 * eta + beta.beta3).scale(1.0).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("beta coefficients need Rosenzweig-MacArthur without competition") {
  KineticsParams p;
  p.alpha = 0.1;
  const Kinetics rm = Kinetics::rosenzweig_macarthur(p);
  CHECK_THROWS_AS(beta_coefficients(rm, Motility::d1(), coexistence(rm)), DomainError);
  const Kinetics lv = Kinetics::lotka_volterra(KineticsParams{});
  CHECK_THROWS_AS(beta_coefficients(lv, Motility::d1(), coexistence(lv)), DomainError);
}

TEST_CASE("quadratic roots agree with a direct eigensolve (property)") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Motility mots[] = {Motility::d1(), Motility::d2(), Motility::d3(), Motility::constant(0.7, 0.4)};
  int n = 0;
  while (n < 1000) {
    KineticsParams p;
    p.gamma = 1.0 + 4.0 * U(gen);
    p.theta = 0.1 + 2.0 * U(gen);
    p.mu = 0.2 + 2.0 * U(gen);
    p.K = 0.5 + 6.0 * U(gen);
    p.lambda = 0.2 + 3.0 * U(gen);
    p.alpha = U(gen) < 0.5 ? 0.0 : U(gen);
    const Kinetics kin = U(gen) < 0.5 ? Kinetics::lotka_volterra(p) : Kinetics::rosenzweig_macarthur(p);
    const auto eqs = compute_equilibria(kin);
    if (!eqs.coexistence) continue;
    const double D = std::pow(10.0, -4.0 + 5.0 * U(gen));
    const double k = 10.0 * U(gen);
    const LinearizedSystem sys = linearize(kin, mots[n % 4], D, *eqs.coexistence);
    const DispersionPoint pt = dispersion(sys, k);
    const auto ref = eigen_roots(sys.mode_matrix(k));
    const double scale = std::max({std::abs(ref[0]), std::abs(ref[1]), 1e-300});
    CHECK(std::abs(pt.rho[0] - ref[0]) / scale < 1e-12);
    CHECK(std::abs(pt.rho[1] - ref[1]) / scale < 1e-12);
    ++n;
  }
}

TEST_CASE("classification follows the coefficient signs") {
  CHECK(classify_mode(1.0, 1.0, -3.0, -0.5) == ModeClass::Stable);
  CHECK(classify_mode(1.0, -1.0, 5.0, 0.6) == ModeClass::SteadyUnstable);
  CHECK(classify_mode(-1.0, 1.0, -3.0, 0.5) == ModeClass::HopfUnstable);
  CHECK(classify_mode(-3.0, 1.0, 5.0, 2.6) == ModeClass::SteadyUnstable);
  CHECK(classify_mode(0.0, 1.0, -4.0, 0.0) == ModeClass::Marginal);
  CHECK(to_string(ModeClass::HopfUnstable) == "hopf_unstable");
  CHECK(to_string(ModeClass::SteadyUnstable) == "steady_unstable");
}

TEST_CASE("dispersion class agrees with the sign of the leading eigenvalue (property)") {
  const Equilibrium e = coexistence(rm_cp());
  for (const Motility& m : {Motility::d1(), Motility::d2(), Motility::d3()}) {
    for (double D : {1.0 / 4800, 1e-2, 0.1, 1.0}) {
      const LinearizedSystem sys = linearize(rm_cp(), m, D, e);
      for (int j = 0; j <= 400; ++j) {
        const DispersionPoint p = dispersion(sys, 0.05 * j);
        if (p.max_real() < -1e-12) {
          CHECK(p.klass == ModeClass::Stable);
        } else if (p.max_real() > 1e-12) {
          CHECK((p.klass == ModeClass::HopfUnstable || p.klass == ModeClass::SteadyUnstable));
          if (p.klass == ModeClass::HopfUnstable) CHECK(std::abs(p.rho[0].imag()) > 0.0);
        }
      }
    }
  }
}

TEST_CASE("Case 1 and Case 3 unstable mode sets") {
  const double ell = 8.0 * std::numbers::pi;
  CHECK(unstable_indices(Motility::d1(), 0.1, ell) == std::vector<int>{0, 1, 2, 3});
  CHECK(unstable_indices(Motility::d3(), 0.1, ell) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  for (const ModeInfo& m : unstable_modes(rm_cp(), Motility::d1(), 0.1, coexistence(rm_cp()), ell)) {
    CHECK(m.point.klass == ModeClass::HopfUnstable);
  }
}

TEST_CASE("Case 2 steady band and unstable modes") {
  const Equilibrium e = coexistence(rm_cp());
  const double D = 1.0 / 4800;
  const BetaCoefficients beta = beta_coefficients(rm_cp(), Motility::d2(), e);
  const auto band = steady_band(beta, D, 0.5);
  REQUIRE(band);
  CHECK(band->lower == doctest::Approx(8.7538820250189273).epsilon(1e-12));
  CHECK(band->upper == doctest::Approx(411.24611797498107).epsilon(1e-12));

  std::vector<int> steady;
  const double ell = 4.0 * std::numbers::pi;
  for (const ModeInfo& m : unstable_modes(rm_cp(), Motility::d2(), D, e, ell)) {
    if (m.point.klass == ModeClass::SteadyUnstable) steady.push_back(m.n);
  }
  REQUIRE(steady.size() == 70);
  CHECK(steady.front() == 12);
  CHECK(steady.back() == 81);
}

TEST_CASE("steady band agrees with a sign scan of b") {
  const Equilibrium e = coexistence(rm_cp());
  const BetaCoefficients beta = beta_coefficients(rm_cp(), Motility::d2(), e);
  for (double D : {1e-4, 5e-4, 2e-3}) {
    const auto band = steady_band(beta, D, 0.5);
    REQUIRE(band);
    const LinearizedSystem sys = linearize(rm_cp(), Motility::d2(), D, e);
    for (int j = 1; j < 4000; ++j) {
      const double eta = band->upper * 1.5 * j / 4000;
      const bool inside = eta > band->lower && eta < band->upper;
      const double b = dispersion(sys, std::sqrt(eta)).b;
      if (std::min(std::abs(eta - band->lower), std::abs(eta - band->upper)) > 1e-6 * band->upper) {
        CHECK((b < 0.0) == inside);
      }
    }
  }
  CHECK_FALSE(steady_band(beta, 1e-2, 0.5));
  CHECK_FALSE(steady_band(beta_coefficients(rm_cp(), Motility::d1(), e), 1e-4, 0.5));
}

TEST_CASE("Hopf band is where the discriminant is negative") {
  const Equilibrium e = coexistence(rm_cp());
  const BetaCoefficients beta = beta_coefficients(rm_cp(), Motility::d1(), e);
  const auto band = hopf_band(beta, 0.1, 0.5);
  REQUIRE(band);
  CHECK(band->lower == 0.0);
  CHECK(band->upper == doctest::Approx(9.7058506591349940).epsilon(1e-12));
  const LinearizedSystem sys = linearize(rm_cp(), Motility::d1(), 0.1, e);
  for (int j = 1; j < 2000; ++j) {
    const double eta = 20.0 * j / 2000;
    if (std::abs(eta - band->upper) < 1e-6) continue;
    CHECK((dispersion(sys, std::sqrt(eta)).delta < 0.0) == (eta < band->upper));
  }
  // D = d*: Delta is linear in eta with negative slope and intercept, so every eta qualifies.
  const auto lin = hopf_band(beta_coefficients(rm_cp(), Motility::d3(), e), 0.1, 0.1);
  REQUIRE(lin);
  CHECK(lin->lower == 0.0);
  CHECK(std::isinf(lin->upper));
  const LinearizedSystem s3 = linearize(rm_cp(), Motility::d3(), 0.1, e);
  for (double eta : {0.0, 1.0, 100.0, 1e6}) CHECK(dispersion(s3, std::sqrt(eta)).delta < 0.0);
}

TEST_CASE("steady threshold for d2") {
  const Equilibrium e = coexistence(rm_cp());
  const auto t = steady_threshold_D(beta_coefficients(rm_cp(), Motility::d2(), e), 0.5);
  REQUIRE(t);
  CHECK(std::abs(*t - 49.0 / 19200) < 1e-9);
  CHECK_FALSE(steady_threshold_D(beta_coefficients(rm_cp(), Motility::d1(), e), 0.5));
  CHECK_FALSE(steady_threshold_D(beta_coefficients(rm_cp(), Motility::d3(), e), 0.1));
}

TEST_CASE("bifurcation curves satisfy their defining identities") {
  const Equilibrium e = coexistence(rm_cp());
  std::vector<double> eta;
  for (int j = 0; j < 200; ++j) eta.push_back(1e-3 * std::pow(1e5, j / 199.0));
  for (const Motility& m : {Motility::d1(), Motility::d2(), Motility::d3()}) {
    const BifurcationCurve c = bifurcation_curves(rm_cp(), m, e, eta);
    REQUIRE(c.eta.size() == eta.size());
    for (std::size_t j = 0; j < eta.size(); ++j) {
      if (std::isfinite(c.D_H[j]) && c.D_H[j] > 0.0) {
        const LinearizedSystem sys = linearize(rm_cp(), m, c.D_H[j], e);
        CHECK(std::abs(dispersion(sys, std::sqrt(eta[j])).a) < 1e-10 * std::max(1.0, eta[j]));
      }
      if (std::isfinite(c.D_S[j]) && c.D_S[j] > 0.0) {
        const LinearizedSystem sys = linearize(rm_cp(), m, c.D_S[j], e);
        CHECK(std::abs(dispersion(sys, std::sqrt(eta[j])).b) < 1e-10 * std::max(1.0, eta[j] * eta[j]));
      }
    }
  }
}

TEST_CASE("mode spectrum uses k = n pi / ell") {
  const LinearizedSystem sys = linearize(rm_cp(), Motility::d1(), 0.1, coexistence(rm_cp()));
  const auto modes = mode_spectrum(sys, 8.0 * std::numbers::pi, 10);
  REQUIRE(modes.size() == 11);
  CHECK(modes[1].k == doctest::Approx(1.0 / 8));
  CHECK(modes[8].k == doctest::Approx(1.0));
  CHECK(mode_cutoff(sys, 8.0 * std::numbers::pi) >= 4);
}

TEST_CASE("minimal stabilizing D agrees with a direct scan") {
  // Lotka-Volterra with competition and prey-repulsive taxis: the homogeneous mode is stable,
  // small prey diffusivity is not.
  KineticsParams p;
  p.alpha = 0.05;
  const Kinetics lv = Kinetics::lotka_volterra(p);
  const Equilibrium e = coexistence(lv);
  const Motility mot = Motility::constant(0.05, -3.0);
  const double ell = 20.0;
  const StabilizingD sd = min_stabilizing_D(lv, mot, e, ell);
  CHECK_FALSE(sd.homogeneous_mode_unstable);
  REQUIRE(sd.d_min);
  CHECK(*sd.d_min > 0.0);
  auto all_stable = [&](double D) {
    const LinearizedSystem sys = linearize(lv, mot, D, e);
    for (int n = 1; n <= 2000; ++n) {
      if (dispersion(sys, n * std::numbers::pi / ell).max_real() > 0.0) return false;
    }
    return true;
  };
  CHECK(all_stable(*sd.d_min * 1.001));
  CHECK_FALSE(all_stable(*sd.d_min * 0.98));
}

TEST_CASE("minimal stabilizing D is absent when the homogeneous mode is unstable") {
  const StabilizingD sd =
      min_stabilizing_D(rm_cp(), Motility::d1(), coexistence(rm_cp()), 8.0 * std::numbers::pi);
  CHECK(sd.homogeneous_mode_unstable);
  CHECK_FALSE(sd.d_min);
}
