#include "spincat/light_shift.hpp"

#include <algorithm>
#include <cmath>

namespace spincat {

namespace {

constexpr Complex kI{0.0, 1.0};

// a.u. polarizability times |E|^2 -> angular frequency (rad/s).
double shift_scale(double e_squared) {
  return constants::au_polarizability * e_squared / constants::hbar;
}

}  // namespace

Polarization::Polarization(const Eigen::Vector3cd& u) : u_(u) {
  if (!u.allFinite() || std::abs(u.squaredNorm() - 1.0) > 1e-12) {
    throw std::invalid_argument("Polarization: vector must have unit norm");
  }
}

Polarization Polarization::linear_z() { return Polarization(Eigen::Vector3cd(0.0, 0.0, 1.0)); }

Polarization Polarization::sigma_plus_x() {
  const double s = 1.0 / std::sqrt(2.0);
  return Polarization(Eigen::Vector3cd(0.0, s, kI * s));
}

Polarization Polarization::sigma_minus_x() {
  const double s = 1.0 / std::sqrt(2.0);
  return Polarization(Eigen::Vector3cd(0.0, s, -kI * s));
}

FieldAmplitude::FieldAmplitude(double e_squared) : e_squared_(e_squared) {
  if (!std::isfinite(e_squared) || e_squared < 0.0) {
    throw std::invalid_argument("FieldAmplitude: |E|^2 must be finite and >= 0");
  }
}

FieldAmplitude FieldAmplitude::from_intensity(double intensity) {
  if (!std::isfinite(intensity) || intensity < 0.0) {
    throw std::invalid_argument("FieldAmplitude: intensity must be finite and >= 0");
  }
  return FieldAmplitude(2.0 * intensity / (constants::vacuum_permittivity * constants::speed_of_light));
}

RabiSet rabi_set(const PolarizabilitySet& alpha, const Polarization& pol, const FieldAmplitude& field,
                 const SpinQuantum& spin) {
  if (!std::isfinite(alpha.alpha_s) || !std::isfinite(alpha.alpha_v) ||
      !std::isfinite(alpha.alpha_t)) {
    throw std::invalid_argument("rabi_set: polarizabilities must be finite");
  }
  const double f = spin.value();
  const double scale = shift_scale(field.e_squared());
  const Eigen::Vector3cd& u = pol.vector();

  RabiSet r;
  r.omega_s = -alpha.alpha_s / 4.0 * scale;

  const Complex vec_pref = kI * alpha.alpha_v / (8.0 * f) * scale;
  r.omega_v(0) = (vec_pref * (u(2) * std::conj(u(1)) - u(1) * std::conj(u(2)))).real();
  r.omega_v(1) = (vec_pref * (u(0) * std::conj(u(2)) - u(2) * std::conj(u(0)))).real();
  r.omega_v(2) = (vec_pref * (u(1) * std::conj(u(0)) - u(0) * std::conj(u(1)))).real();

  if (alpha.alpha_t != 0.0) {
    if (spin.two_f() == 1) {
      throw std::domain_error("rabi_set: tensor light shift is undefined for F = 1/2 (2F - 1 = 0)");
    }
    const double denom = f * (2.0 * f - 1.0);
    for (int i = 0; i < 3; ++i) {
      r.omega_t(i, i) = -alpha.alpha_t / (4.0 * denom) * scale * (3.0 * std::norm(u(i)) - 1.0);
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        r.omega_t(i, j) = -3.0 * alpha.alpha_t / (8.0 * denom) * scale *
                          (u(i) * std::conj(u(j)) + std::conj(u(i)) * u(j)).real();
      }
    }
  }
  return r;
}

namespace {

void check_symmetric(const RabiSet& rabi) {
  const double scale = std::max(1.0, rabi.omega_t.cwiseAbs().maxCoeff());
  if ((rabi.omega_t - rabi.omega_t.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("RabiSet: tensor part must be symmetric");
  }
}

Operator vector_and_tensor(const Eigen::Vector3d& vec, const Eigen::Matrix3d& tensor,
                           const SpinQuantum& spin) {
  const AngularMomentum j = angular_momentum_operators(spin);
  const std::array<const Operator*, 3> f{&j.fx, &j.fy, &j.fz};
  Operator h = Operator::Zero(spin.dim(), spin.dim());
  for (int i = 0; i < 3; ++i) {
    h += vec(i) * *f[i];
    for (int k = 0; k < 3; ++k) {
      if (tensor(i, k) != 0.0) h += tensor(i, k) * (*f[i] * *f[k]);
    }
  }
  return h;
}

}  // namespace

Operator full_light_shift_operator(const RabiSet& rabi, const SpinQuantum& spin) {
  check_symmetric(rabi);
  Operator h = vector_and_tensor(rabi.omega_v, rabi.omega_t, spin);
  h.diagonal().array() += rabi.omega_s;
  return h;
}

EffectiveHamiltonian effective_spin_hamiltonian(const RabiSet& rabi, const SpinQuantum& spin) {
  check_symmetric(rabi);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(rabi.omega_t, Eigen::EigenvaluesOnly);
  const double lambda = es.eigenvalues()(1);  // ascending, so (1) is the median
  const Eigen::Matrix3d reduced = rabi.omega_t - lambda * Eigen::Matrix3d::Identity();
  const double f = spin.value();

  EffectiveHamiltonian out;
  out.hamiltonian = vector_and_tensor(rabi.omega_v, reduced, spin);
  out.identity_offset = rabi.omega_s + lambda * f * (f + 1.0);
  return out;
}

Operator control_hamiltonian(double omega1, double omega2, const SpinQuantum& spin) {
  const AngularMomentum j = angular_momentum_operators(spin);
  return omega1 * j.fx + omega2 * (j.fx * j.fx);
}

Operator zeeman_hamiltonian(const ZeemanParams& z, const SpinQuantum& spin) {
  return z.larmor() * angular_momentum_operators(spin).fz;
}

double probe_differential_shift(const ProbeShiftParams& p, int two_m, double intensity) {
  const SpinQuantum& spin = p.f_probe;
  if (!spin.contains(two_m)) {
    throw std::domain_error("probe_differential_shift: m outside the probe manifold");
  }
  if (spin.two_f() == 1 && p.delta_alpha_2 != 0.0) {
    throw std::domain_error("probe_differential_shift: tensor term undefined for F = 1/2");
  }
  double delta_alpha = p.delta_alpha_0;
  if (p.delta_alpha_2 != 0.0) {
    // 3m^2 - F(F+1) and F(2F-1) in quarter units to keep the magic-state
    // cancellation exact.
    const double num = 3.0 * two_m * two_m - spin.two_f() * (spin.two_f() + 2);
    const double den = 2.0 * spin.two_f() * (spin.two_f() - 1);
    delta_alpha += p.delta_alpha_2 * num / den;
  }
  const double e2 = FieldAmplitude::from_intensity(intensity).e_squared();
  return -delta_alpha * constants::au_polarizability * e2 / (4.0 * constants::planck);
}

std::array<double, 2> control_rabi_frequencies(const PolarizabilitySet& alpha,
                                               const FieldAmplitude& field,
                                               const SpinQuantum& spin) {
  const RabiSet r = rabi_set(alpha, Polarization::sigma_plus_x(), field, spin);
  return {r.omega_v(0), r.omega_t(0, 0) - r.omega_t(1, 1)};
}

double lattice_tensor_frequency(double alpha_t, const FieldAmplitude& field, const SpinQuantum& spin) {
  const RabiSet r = rabi_set({0.0, 0.0, alpha_t}, Polarization::linear_z(), field, spin);
  return r.omega_t(2, 2) - r.omega_t(0, 0);
}

}  // namespace spincat
