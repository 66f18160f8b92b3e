#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace spincat {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

/// Raised when a caller breaks a documented precondition (non-Hermitian
/// generator, mixed state where a ket is required, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Spin quantum number stored as 2F so half-integers stay exact.
class SpinQuantum {
 public:
  explicit SpinQuantum(int two_f);

  /// Nearest representable spin; throws unless 2F is a positive integer.
  static SpinQuantum from_value(double f);

  int two_f() const noexcept { return two_f_; }
  int dim() const noexcept { return two_f_ + 1; }
  double value() const noexcept { return 0.5 * two_f_; }
  bool is_half_integer() const noexcept { return two_f_ % 2 == 1; }

  /// 2m for basis index i (i = 0 is m = +F).
  int two_m_at(int index) const noexcept { return two_f_ - 2 * index; }
  double m_at(int index) const noexcept { return 0.5 * two_m_at(index); }

  /// Basis index for 2m, or throws std::domain_error.
  int index_of(int two_m) const;
  bool contains(int two_m) const noexcept;

  bool operator==(const SpinQuantum&) const = default;

 private:
  int two_f_;
};

struct AngularMomentum {
  Operator fx;
  Operator fy;
  Operator fz;
};

AngularMomentum angular_momentum_operators(const SpinQuantum& spin);

/// Pure ket or density matrix in the |F,m> basis ordered m = +F ... -F.
class SpinState {
 public:
  static SpinState pure(Ket ket);
  static SpinState mixed(Operator rho);

  bool is_pure() const noexcept { return std::holds_alternative<Ket>(repr_); }
  int dim() const noexcept;

  /// Throws ContractViolation for mixed states.
  const Ket& ket() const;
  /// Density matrix; built on demand for kets.
  Operator density() const;

  /// Populations <m|rho|m> in basis order.
  Eigen::VectorXd populations() const;
  double expectation(const Operator& op) const;

 private:
  explicit SpinState(std::variant<Ket, Operator> repr) : repr_(std::move(repr)) {}
  std::variant<Ket, Operator> repr_;
};

SpinState basis_ket(const SpinQuantum& spin, int two_m);

/// exp(-i phi Fz) exp(-i theta Fy) |F,F>.
SpinState coherent_state(const SpinQuantum& spin, double theta, double phi);

/// (|F,F> + e^{i phase} |F,-F>) / sqrt(2).
SpinState cat_state(const SpinQuantum& spin, double phase);

/// exp(-i H t) via Hermitian eigendecomposition. H in rad/s, t in seconds.
Operator propagator(const Operator& hamiltonian, double t);

SpinState evolve(const Operator& hamiltonian, double t, const SpinState& state);
SpinState apply_unitary(const Operator& unitary, const SpinState& state);

/// |<a|b>|^2 for kets; Tr(rho_a rho_b) when either input is mixed.
double fidelity(const SpinState& a, const SpinState& b);

double max_abs(const Operator& m);
bool is_hermitian(const Operator& m, double tol = 1e-12);
bool is_unitary(const Operator& m, double tol = 1e-12);

/// min over alpha of max-abs(a - e^{i alpha} b), with alpha taken from the
/// largest-magnitude overlap component.
double phase_aligned_distance(const Operator& a, const Operator& b);
double phase_aligned_distance(const Ket& a, const Ket& b);

/// Trace distance 0.5 * ||a - b||_1 for Hermitian inputs.
double trace_distance(const Operator& a, const Operator& b);

}  // namespace spincat
