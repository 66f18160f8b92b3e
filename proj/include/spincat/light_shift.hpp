#pragma once

#include <array>

#include "spincat/constants.hpp"
#include "spincat/spin_algebra.hpp"

namespace spincat {

/// Scalar, vector and tensor dynamic polarizabilities in atomic units.
struct PolarizabilitySet {
  double alpha_s = 0.0;
  double alpha_v = 0.0;
  double alpha_t = 0.0;
};

/// Unit complex polarization vector (x, y, z).
class Polarization {
 public:
  explicit Polarization(const Eigen::Vector3cd& u);

  static Polarization linear_z();
  /// sigma+ for propagation along x: (0, 1, i)/sqrt(2).
  static Polarization sigma_plus_x();
  static Polarization sigma_minus_x();

  const Eigen::Vector3cd& vector() const noexcept { return u_; }

 private:
  Eigen::Vector3cd u_;
};

/// Squared field amplitude |E|^2 in (V/m)^2.
class FieldAmplitude {
 public:
  explicit FieldAmplitude(double e_squared);
  /// |E|^2 = 2 I / (eps0 c), I in W/m^2.
  static FieldAmplitude from_intensity(double intensity);

  double e_squared() const noexcept { return e_squared_; }

 private:
  double e_squared_;
};

/// Generalized Rabi frequencies in rad/s.
struct RabiSet {
  double omega_s = 0.0;
  Eigen::Vector3d omega_v = Eigen::Vector3d::Zero();
  Eigen::Matrix3d omega_t = Eigen::Matrix3d::Zero();
};

struct ZeemanParams {
  double gamma = constants::yb173_gamma;  // rad s^-1 T^-1, signed
  double b_field = 0.0;                   // T

  double larmor() const noexcept { return gamma * b_field; }
};

struct ProbeShiftParams {
  double delta_alpha_0 = 0.0;  // a.u.
  double delta_alpha_2 = 0.0;  // a.u.
  SpinQuantum f_probe{7};
};

/// Spin Hamiltonian left after dropping the scalar shift and the isotropic
/// F^2 part. The full light-shift operator equals
/// `hamiltonian + identity_offset * I`.
struct EffectiveHamiltonian {
  Operator hamiltonian;
  double identity_offset = 0.0;
};

RabiSet rabi_set(const PolarizabilitySet& alpha, const Polarization& u, const FieldAmplitude& field,
                 const SpinQuantum& spin);

/// Literal expansion Omega^S + sum_i Omega^V_i F_i + sum_ij Omega^T_ij F_i F_j.
Operator full_light_shift_operator(const RabiSet& rabi, const SpinQuantum& spin);

/// Removes lambda * F^2 where lambda is the median eigenvalue of Omega^T, so
/// uniaxial tensors reduce to a single Omega^(2) F_n^2 term along their axis.
EffectiveHamiltonian effective_spin_hamiltonian(const RabiSet& rabi, const SpinQuantum& spin);

/// omega1 Fx + omega2 Fx^2 (rad/s).
Operator control_hamiltonian(double omega1, double omega2, const SpinQuantum& spin);

/// gamma B Fz (rad/s).
Operator zeeman_hamiltonian(const ZeemanParams& z, const SpinQuantum& spin);

/// Differential light shift of probe-state projection m (given as 2m) in Hz
/// for lattice intensity I in W/m^2:
///   delta_nu = -(|E|^2 / 4h) [da0 + da2 (3m^2 - F(F+1)) / (F(2F-1))]
double probe_differential_shift(const ProbeShiftParams& p, int two_m, double intensity);

/// Control-laser pair (Omega_x^(1), Omega_xx^(2)) for sigma+ light along x.
std::array<double, 2> control_rabi_frequencies(const PolarizabilitySet& alpha,
                                               const FieldAmplitude& field,
                                               const SpinQuantum& spin);

/// Lattice tensor coefficient Omega~_zz^(2) for z-linear light.
double lattice_tensor_frequency(double alpha_t, const FieldAmplitude& field,
                                const SpinQuantum& spin);

}  // namespace spincat
