#include <doctest.h>

#include <cmath>

#include "spincat/metrology.hpp"
#include "spincat/sequence.hpp"
#include "support.hpp"

using namespace spincat;

namespace {

constexpr double kPi = constants::pi;
const SpinQuantum kSpin(5);
const Operator kFz = angular_momentum_operators(kSpin).fz;
const double kGamma = constants::yb173_gamma;

Operator mixture() { return mixture_density(kSpin, std::vector<double>{0.3, -1.0, 2.0}); }

}  // namespace

TEST_SUITE("metrology") {

TEST_CASE("pure-state QFI") {
  CHECK(qfi_pure(cat_state(kSpin, 0.4), kFz) == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(qfi_pure(coherent_state(kSpin, kPi / 2, 1.1), kFz) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(qfi_pure(basis_ket(kSpin, 3), kFz)) < 1e-12);
  CHECK_THROWS_AS(qfi_pure(SpinState::mixed(mixture()), kFz), ContractViolation);
}

TEST_CASE("mixed-state QFI") {
  CHECK(qfi_mixed(mixture(), kFz) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(qfi_mixed(cat_state(kSpin, 0.0).density(), kFz) == doctest::Approx(25.0).epsilon(1e-10));
  CHECK(std::abs(qfi_mixed(Operator::Identity(6, 6) / 6.0, kFz)) < 1e-12);
  Operator bad = Operator::Zero(6, 6);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  CHECK_THROWS(qfi_mixed(bad, kFz));
}

TEST_CASE("rank-1 mixed QFI matches the pure formula") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SpinState psi = SpinState::pure(spincat::testing::random_ket(6, rng));
    const Operator g = spincat::testing::random_hermitian(6, rng);
    CHECK(qfi_mixed(psi.density(), g) == doctest::Approx(qfi_pure(psi, g)).epsilon(1e-9));
  }
}

TEST_CASE("classical Fisher information") {
  SUBCASE("two-outcome cosine at pi/2") {
    const OutcomeModel p = [](double phi) {
      return std::vector<double>{0.5 * (1 + std::cos(phi)), 0.5 * (1 - std::cos(phi))};
    };
    CHECK(cfi_phase(p, kPi / 2) == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("cat readout at the optimum") {
    const double pb = 0.9, c = 0.88;
    const auto p = cat_fringe_outcomes(pb, c);
    const auto dp = cat_fringe_derivatives(pb, c);
    CHECK(cfi_phase(p, kPi / 2) == doctest::Approx(pb * c * c).epsilon(1e-8));
    CHECK(cfi_phase(p, dp, kPi / 2) == doctest::Approx(pb * c * c).epsilon(1e-12));
    for (double phi : {0.1, 0.7, 1.3, 2.9}) {
      CHECK(cfi_phase(p, phi) == doctest::Approx(cfi_phase(p, dp, phi)).epsilon(1e-6));
    }
  }
  SUBCASE("phase-independent outcomes carry no information") {
    const OutcomeModel flat = [](double) { return std::vector<double>{0.2, 0.8}; };
    CHECK(cfi_phase(flat, 1.0) == 0.0);
  }
  SUBCASE("zero-probability outcomes") {
    const OutcomeModel p = [](double phi) {
      return std::vector<double>{0.5 * (1 + std::cos(phi)), 0.5 * (1 - std::cos(phi)), 0.0};
    };
    CHECK(cfi_phase(p, kPi / 2) == doctest::Approx(1.0).epsilon(1e-8));
    const OutcomeModel neg = [](double) { return std::vector<double>{1.2, -0.2}; };
    CHECK_THROWS(cfi_phase(neg, 0.0));
  }
}

TEST_CASE("classical information never exceeds the quantum bound") {
  // Cat readout: I <= (2F)^2 = QFI of the cat for the generator Fz.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const double qfi_cat = qfi_pure(cat_state(kSpin, 0.0), kFz);
  for (int trial = 0; trial < 50; ++trial) {
    const double pb = u(rng), c = u(rng), phi = 6 * u(rng);
    // phase-per-spin derivative: Phi = 2F theta.
    const double info = 25.0 * cfi_phase(cat_fringe_outcomes(pb, c), phi);
    CHECK(info <= qfi_cat * (1 + 1e-9));
  }
  // Projective z readout after an x rotation: CFI of populations <= QFI for CSS and mixtures.
  const auto j = angular_momentum_operators(kSpin);
  const Operator rot = propagator(j.fx, kPi / 2);
  for (const Operator& rho0 : {coherent_state(kSpin, kPi / 2, 0.0).density(), mixture(),
                               cat_state(kSpin, 0.3).density()}) {
    const OutcomeModel p = [&](double theta) {
      const Operator u = propagator(kFz, theta);
      const Operator r = rot * u * rho0 * u.adjoint() * rot.adjoint();
      std::vector<double> out(6);
      for (int i = 0; i < 6; ++i) out[i] = std::max(0.0, r(i, i).real());
      return out;
    };
    const double q = qfi_mixed(rho0, kFz);
    for (double theta : {0.2, 0.9, 1.7}) CHECK(cfi_phase(p, theta) <= q * (1 + 1e-6) + 1e-9);
  }
}

TEST_CASE("sensitivity numbers") {
  const SensitivityReport r = sensitivity_cat(0.90, 0.88, kSpin, kGamma, 160.0);
  CHECK(r.limit_hl * 1e9 == doctest::Approx(0.096).epsilon(0.01));
  CHECK(r.limit_sql * 1e9 == doctest::Approx(0.215).epsilon(0.01));
  CHECK(std::abs(r.sigma_b * 1e9 - 0.12) < 0.01);
  CHECK(r.fisher_quantum == 25.0);
  CHECK(r.fisher_classical == doctest::Approx(25 * 0.9 * 0.88 * 0.88));
  const SensitivityReport r180 = sensitivity_cat(0.92, 0.82, kSpin, kGamma, 180.0);
  CHECK(std::abs(r180.sigma_b * 1e9 - 0.11) < 0.01);
  CHECK(enhancement_db(0.70e-9, r.sigma_b) == doctest::Approx(15.0).epsilon(0.07));

  const SensitivityReport ideal = sensitivity_cat(1.0, 1.0, kSpin, kGamma, 37.0);
  CHECK(ideal.sigma_b == doctest::Approx(ideal.limit_hl).epsilon(1e-15));
  CHECK_THROWS(sensitivity_cat(0.9, 0.0, kSpin, kGamma, 1.0));
  CHECK_THROWS(sensitivity_cat(0.9, 0.5, kSpin, kGamma, 0.0));
}

TEST_CASE("cat sensitivity is monotone in C, P_bar and tau") {
  double prev = INFINITY;
  for (double c = 0.1; c <= 1.0; c += 0.1) {
    const double s = sensitivity_cat(0.9, c, kSpin, kGamma, 100).sigma_b;
    CHECK(s < prev);
    prev = s;
  }
  prev = INFINITY;
  for (double p = 0.1; p <= 1.0; p += 0.1) {
    const double s = sensitivity_cat(p, 0.9, kSpin, kGamma, 100).sigma_b;
    CHECK(s < prev);
    prev = s;
  }
  prev = INFINITY;
  for (double t = 10; t <= 200; t += 10) {
    const double s = sensitivity_cat(0.9, 0.9, kSpin, kGamma, t).sigma_b;
    CHECK(s < prev);
    CHECK(s >= sensitivity_cat(0.9, 0.9, kSpin, kGamma, t).limit_hl * (1 - 1e-9));
    prev = s;
  }
}

TEST_CASE("CSS sensitivity formula") {
  const double b = 1.24e-6;
  const double wl = std::abs(kGamma * b);
  const SensitivityReport r = sensitivity_css(1.0, wl, kGamma, b, 50.0, kSpin);
  CHECK(r.sigma_b == doctest::Approx(1.0 / (std::abs(kGamma) * 50.0)).epsilon(1e-14));
  const double half = sensitivity_css(0.4, 3.0, kGamma, b, 50.0, kSpin).sigma_b;
  const double full = sensitivity_css(0.8, 3.0, kGamma, b, 50.0, kSpin).sigma_b;
  CHECK(half / full == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS(sensitivity_css(0.8, 0.0, kGamma, b, 50.0, kSpin));
}

TEST_CASE("Clebsch-Gordan and spherical harmonics") {
  CHECK(clebsch_gordan(1, 1, 1, -1, 0, 0) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(clebsch_gordan(1, 1, 1, 1, 2, 2) == doctest::Approx(1.0));
  CHECK(clebsch_gordan(2, 0, 2, 0, 2, 0) == doctest::Approx(0.0));
  CHECK(std::abs(spherical_harmonic(0, 0, 0.3, 0.2) - 0.5 / std::sqrt(kPi)) < 1e-15);
  CHECK(std::abs(spherical_harmonic(1, 0, 0.3, 0.2) - std::sqrt(3 / (4 * kPi)) * std::cos(0.3)) < 1e-15);
  const Complex y11 = -std::sqrt(3 / (8 * kPi)) * std::sin(0.3) * std::exp(Complex(0, 0.2));
  CHECK(std::abs(spherical_harmonic(1, 1, 0.3, 0.2) - y11) < 1e-15);
}

TEST_CASE("Wigner maps") {
  SUBCASE("maximally mixed is flat") {
    const WignerMap m = wigner_map(Operator::Identity(6, 6) / 6.0, 16, 24);
    CHECK(m.min_value() == doctest::Approx(1 / (4 * kPi)).epsilon(1e-12));
    CHECK(m.max_value() == doctest::Approx(1 / (4 * kPi)).epsilon(1e-12));
    CHECK(m.integral() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("stretched state is axial with its peak at the pole") {
    const WignerMap m = wigner_map(basis_ket(kSpin, 5).density(), 24, 32);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
      CHECK(m.values.row(i).maxCoeff() - m.values.row(i).minCoeff() < 1e-12);
    }
    CHECK(m.values(0, 0) == doctest::Approx(m.max_value()));
    CHECK(m.integral() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("cat is negative somewhere and has 2 pi / 2F symmetry") {
    const Operator rho = cat_state(kSpin, -kPi / 2).density();
    const WignerMap m = wigner_map(rho, 32, 100);
    CHECK(m.min_value() < 0.0);
    CHECK(m.integral() == doctest::Approx(1.0).epsilon(1e-12));
    double worst = 0.0;
    for (Eigen::Index j = 0; j < 100; ++j) {
      worst = std::max(worst, (m.values.col(j) - m.values.col((j + 20) % 100)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-9);
  }
  SUBCASE("the binomial mixture is also nonclassical") {
    CHECK(wigner_map(mixture(), 32, 64).min_value() < 0.0);
  }
  SUBCASE("rotation covariance about z") {
    std::mt19937_64 rng(12);
    const Operator rho = spincat::testing::random_density(6, 2, rng);
    const double alpha = 0.7;
    const Operator u = propagator(kFz, alpha);
    const WignerExpansion a(rho);
    const WignerExpansion b(u * rho * u.adjoint());
    for (double theta : {0.2, 1.1, 2.4}) {
      for (double phi : {0.0, 1.0, 4.0}) CHECK(std::abs(b(theta, phi) - a(theta, phi - alpha)) < 1e-12);
    }
  }
  SUBCASE("grid validation") { CHECK_THROWS(wigner_map(Operator::Identity(6, 6) / 6.0, 0, 4)); }
}

}  // TEST_SUITE
