#include <doctest.h>

#include <cmath>
#include <random>

#include "spincat/light_shift.hpp"

using namespace spincat;

namespace {

const Complex kI{0.0, 1.0};
const SpinQuantum kSpin(5);
// |E|^2 giving a unit shift scale: alpha_au * |E|^2 / hbar = 1 rad/s.
const FieldAmplitude kUnitField(constants::hbar / constants::au_polarizability);

Polarization random_polarization(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Vector3cd u;
  for (int i = 0; i < 3; ++i) u(i) = Complex(n(rng), n(rng));
  return Polarization(u.normalized());
}

}  // namespace

TEST_SUITE("light_shift") {

TEST_CASE("field amplitude from intensity") {
  const double i = 8e2;  // 80 mW/cm^2
  CHECK(FieldAmplitude::from_intensity(i).e_squared() ==
        doctest::Approx(2 * i / (constants::vacuum_permittivity * constants::speed_of_light)).epsilon(1e-15));
  CHECK_THROWS(FieldAmplitude(-1.0));
  CHECK_THROWS(Polarization(Eigen::Vector3cd(1.0, 1.0, 0.0)));
}

TEST_CASE("scalar-only light shift") {
  const RabiSet r = rabi_set({3.0, 0.0, 0.0}, Polarization::sigma_plus_x(), kUnitField, kSpin);
  CHECK(r.omega_s == doctest::Approx(-0.75));
  CHECK(r.omega_v.norm() == 0.0);
  CHECK(r.omega_t.norm() == 0.0);
}

TEST_CASE("sigma+ along x gives only an x vector shift") {
  const double av = 2.0;
  const RabiSet r = rabi_set({0.0, av, 0.0}, Polarization::sigma_plus_x(), kUnitField, kSpin);
  CHECK(r.omega_v(0) == doctest::Approx(-av / (8 * 2.5)).epsilon(1e-14));
  CHECK(r.omega_v(1) == 0.0);
  CHECK(r.omega_v(2) == 0.0);
}

TEST_CASE("linear z polarization tensor elements") {
  const double at = 1.0;
  const double d = 2.5 * 4.0;  // F(2F-1)
  const RabiSet r = rabi_set({0.0, 0.0, at}, Polarization::linear_z(), kUnitField, kSpin);
  CHECK(r.omega_t(2, 2) == doctest::Approx(-at * 2.0 / (4 * d)).epsilon(1e-14));
  CHECK(r.omega_t(0, 0) == doctest::Approx(at / (4 * d)).epsilon(1e-14));
  CHECK(r.omega_t(0, 0) == r.omega_t(1, 1));
  CHECK(lattice_tensor_frequency(at, kUnitField, kSpin) == doctest::Approx(-3 * at / (4 * d)).epsilon(1e-14));
}

TEST_CASE("F = 1/2 tensor terms are rejected") {
  CHECK_THROWS_AS(rabi_set({0.0, 0.0, 1.0}, Polarization::linear_z(), kUnitField, SpinQuantum(1)),
                  std::domain_error);
  CHECK_NOTHROW(rabi_set({1.0, 1.0, 0.0}, Polarization::linear_z(), kUnitField, SpinQuantum(1)));
}

TEST_CASE("control Hamiltonian from sigma+ light") {
  const double av = 1.7, at = 0.6;
  const double d = 2.5 * 4.0;
  const RabiSet r = rabi_set({0.4, av, at}, Polarization::sigma_plus_x(), kUnitField, kSpin);
  const EffectiveHamiltonian h = effective_spin_hamiltonian(r, kSpin);
  const double w1 = -av / (8 * 2.5);
  const double w2 = 3 * at / (8 * d);
  CHECK(max_abs(h.hamiltonian - control_hamiltonian(w1, w2, kSpin)) < 1e-14);
  const auto pair = control_rabi_frequencies({0.4, av, at}, kUnitField, kSpin);
  CHECK(pair[0] == doctest::Approx(w1).epsilon(1e-14));
  CHECK(pair[1] == doctest::Approx(w2).epsilon(1e-14));

  // Full expansion minus reduced form is a multiple of the identity.
  const Operator diff = full_light_shift_operator(r, kSpin) - h.hamiltonian;
  CHECK(max_abs(diff - h.identity_offset * Operator::Identity(6, 6)) < 1e-14);
}

TEST_CASE("lattice Hamiltonian from z-linear light") {
  const double at = 2.0;
  const RabiSet r = rabi_set({0.0, 0.0, at}, Polarization::linear_z(), kUnitField, kSpin);
  const EffectiveHamiltonian h = effective_spin_hamiltonian(r, kSpin);
  const auto j = angular_momentum_operators(kSpin);
  CHECK(max_abs(h.hamiltonian - (-3 * at / (4 * 10.0)) * j.fz * j.fz) < 1e-14);
  CHECK(max_abs(effective_spin_hamiltonian(RabiSet{}, kSpin).hamiltonian) == 0.0);
}

TEST_CASE("asymmetric tensor input is rejected") {
  RabiSet r;
  r.omega_t(0, 1) = 1.0;
  CHECK_THROWS(effective_spin_hamiltonian(r, kSpin));
}

TEST_CASE("sigma- flips the vector shift only") {
  const PolarizabilitySet a{0.0, 1.3, 0.8};
  const RabiSet p = rabi_set(a, Polarization::sigma_plus_x(), kUnitField, kSpin);
  const RabiSet m = rabi_set(a, Polarization::sigma_minus_x(), kUnitField, kSpin);
  CHECK(m.omega_v(0) == doctest::Approx(-p.omega_v(0)).epsilon(1e-15));
  CHECK((m.omega_t - p.omega_t).norm() < 1e-15);
}

TEST_CASE("global phase of u and Hermiticity") {
  std::mt19937_64 rng(9);
  const PolarizabilitySet a{0.3, -1.1, 0.7};
  for (int trial = 0; trial < 20; ++trial) {
    const Polarization u = random_polarization(rng);
    const Polarization v(std::exp(kI * (0.37 * trial)) * u.vector());
    const RabiSet ru = rabi_set(a, u, kUnitField, kSpin);
    const RabiSet rv = rabi_set(a, v, kUnitField, kSpin);
    CHECK(std::abs(ru.omega_s - rv.omega_s) < 1e-15);
    CHECK((ru.omega_v - rv.omega_v).norm() < 1e-14);
    CHECK((ru.omega_t - rv.omega_t).norm() < 1e-14);
    CHECK((ru.omega_t - ru.omega_t.transpose()).norm() < 1e-15);
    CHECK(is_hermitian(effective_spin_hamiltonian(ru, kSpin).hamiltonian, 1e-12));
  }
}

TEST_CASE("control and Zeeman Hamiltonians") {
  const auto j = angular_momentum_operators(kSpin);
  const double w = constants::two_pi * 518.7;
  CHECK(max_abs(control_hamiltonian(w, -w, kSpin) - (w * j.fx - w * j.fx * j.fx)) < 1e-9);
  CHECK(max_abs(control_hamiltonian(1.0, 0.0, kSpin) - j.fx) == 0.0);

  CHECK(max_abs(zeeman_hamiltonian({constants::yb173_gamma, 0.0}, kSpin)) == 0.0);
  const ZeemanParams z{constants::yb173_gamma, 1.24e-6};
  CHECK(std::abs(z.larmor()) / constants::two_pi == doctest::Approx(2.5706).epsilon(1e-4));
  const Operator h0 = zeeman_hamiltonian(z, kSpin);
  for (int i = 0; i < 6; ++i) CHECK(h0(i, i).real() == doctest::Approx(z.larmor() * kSpin.m_at(i)));
}

TEST_CASE("probe differential shift and the magic condition") {
  ProbeShiftParams p;
  p.delta_alpha_0 = 5.0;
  p.delta_alpha_2 = -5.0;
  const double intensity = 1e9;
  CHECK(probe_differential_shift(p, 7, intensity) == 0.0);
  for (int two_m = -5; two_m <= 5; two_m += 2) CHECK(probe_differential_shift(p, two_m, intensity) != 0.0);
  CHECK_THROWS_AS(probe_differential_shift(p, 9, intensity), std::domain_error);
  ProbeShiftParams zero;
  for (int two_m = -7; two_m <= 7; two_m += 2) CHECK(probe_differential_shift(zero, two_m, intensity) == 0.0);
}

}  // TEST_SUITE
