#include "spincat/spin_algebra.hpp"

#include <cmath>

namespace spincat {

namespace {

constexpr Complex kI{0.0, 1.0};

// Entry (row, col) of a and b with the largest |conj(b) a|.
template <typename Mat>
double aligned_distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("phase_aligned_distance: shape mismatch");
  }
  const auto overlap = (b.conjugate().array() * a.array()).eval();
  Eigen::Index r = 0, c = 0;
  overlap.abs().maxCoeff(&r, &c);
  const Complex z = overlap(r, c);
  const Complex phase = std::abs(z) > 0.0 ? z / std::abs(z) : Complex{1.0, 0.0};
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace

SpinQuantum::SpinQuantum(int two_f) : two_f_(two_f) {
  if (two_f < 1) {
    throw std::domain_error("SpinQuantum: 2F must be >= 1, got " + std::to_string(two_f));
  }
}

SpinQuantum SpinQuantum::from_value(double f) {
  const double twice = 2.0 * f;
  const double rounded = std::round(twice);
  if (!std::isfinite(f) || std::abs(twice - rounded) > 1e-9) {
    throw std::domain_error("SpinQuantum: F must be a multiple of 1/2");
  }
  return SpinQuantum(static_cast<int>(rounded));
}

bool SpinQuantum::contains(int two_m) const noexcept {
  return std::abs(two_m) <= two_f_ && ((two_f_ - two_m) % 2 == 0);
}

int SpinQuantum::index_of(int two_m) const {
  if (!contains(two_m)) {
    throw std::domain_error("m = " + std::to_string(two_m) + "/2 is not a projection of F = " +
                            std::to_string(two_f_) + "/2");
  }
  return (two_f_ - two_m) / 2;
}

AngularMomentum angular_momentum_operators(const SpinQuantum& spin) {
  const int d = spin.dim();
  const double f = spin.value();
  Operator raise = Operator::Zero(d, d);
  // F+ |m> = sqrt(F(F+1) - m(m+1)) |m+1>; index i-1 holds m+1.
  for (int i = 1; i < d; ++i) {
    const double m = spin.m_at(i);
    raise(i - 1, i) = std::sqrt(f * (f + 1.0) - m * (m + 1.0));
  }
  const Operator lower = raise.adjoint();
  AngularMomentum out;
  out.fx = 0.5 * (raise + lower);
  out.fy = (raise - lower) / (2.0 * kI);
  out.fz = Operator::Zero(d, d);
  for (int i = 0; i < d; ++i) out.fz(i, i) = spin.m_at(i);
  return out;
}

SpinState SpinState::pure(Ket ket) {
  const double n = ket.norm();
  if (ket.size() == 0 || std::abs(n - 1.0) > 1e-12) {
    throw ContractViolation("SpinState::pure: ket must have unit norm");
  }
  return SpinState(std::move(ket));
}

SpinState SpinState::mixed(Operator rho) {
  if (rho.rows() == 0 || rho.rows() != rho.cols()) {
    throw ContractViolation("SpinState::mixed: density matrix must be square");
  }
  if (!is_hermitian(rho, 1e-12)) {
    throw ContractViolation("SpinState::mixed: density matrix must be Hermitian");
  }
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > 1e-12) {
    throw ContractViolation("SpinState::mixed: density matrix must have unit trace");
  }
  Eigen::SelfAdjointEigenSolver<Operator> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw ContractViolation("SpinState::mixed: density matrix must be positive semidefinite");
  }
  return SpinState(std::move(rho));
}

int SpinState::dim() const noexcept {
  return std::visit([](const auto& r) { return static_cast<int>(r.rows()); }, repr_);
}

const Ket& SpinState::ket() const {
  if (!is_pure()) throw ContractViolation("SpinState::ket: state is mixed");
  return std::get<Ket>(repr_);
}

Operator SpinState::density() const {
  if (is_pure()) {
    const Ket& k = std::get<Ket>(repr_);
    return k * k.adjoint();
  }
  return std::get<Operator>(repr_);
}

Eigen::VectorXd SpinState::populations() const {
  if (is_pure()) return std::get<Ket>(repr_).cwiseAbs2();
  return std::get<Operator>(repr_).diagonal().real();
}

double SpinState::expectation(const Operator& op) const {
  if (is_pure()) {
    const Ket& k = std::get<Ket>(repr_);
    return k.dot(op * k).real();
  }
  return (std::get<Operator>(repr_) * op).trace().real();
}

SpinState basis_ket(const SpinQuantum& spin, int two_m) {
  Ket k = Ket::Zero(spin.dim());
  k(spin.index_of(two_m)) = 1.0;
  return SpinState::pure(std::move(k));
}

SpinState coherent_state(const SpinQuantum& spin, double theta, double phi) {
  const AngularMomentum j = angular_momentum_operators(spin);
  Ket k = Ket::Zero(spin.dim());
  k(0) = 1.0;
  k = propagator(j.fy, theta) * k;
  // exp(-i phi Fz) is diagonal.
  for (int i = 0; i < spin.dim(); ++i) k(i) *= std::exp(-kI * phi * spin.m_at(i));
  k.normalize();
  return SpinState::pure(std::move(k));
}

SpinState cat_state(const SpinQuantum& spin, double phase) {
  Ket k = Ket::Zero(spin.dim());
  k(0) = 1.0 / std::sqrt(2.0);
  k(spin.dim() - 1) = std::exp(kI * phase) / std::sqrt(2.0);
  return SpinState::pure(std::move(k));
}

Operator propagator(const Operator& hamiltonian, double t) {
  if (hamiltonian.rows() != hamiltonian.cols()) {
    throw ContractViolation("propagator: Hamiltonian must be square");
  }
  // Relative Hermiticity check so rad/s-scaled generators are accepted.
  const double scale = std::max(1.0, max_abs(hamiltonian));
  if (!is_hermitian(hamiltonian, 1e-12 * scale)) {
    throw ContractViolation("propagator: Hamiltonian is not Hermitian");
  }
  if (t == 0.0) return Operator::Identity(hamiltonian.rows(), hamiltonian.cols());
  const Operator h = 0.5 * (hamiltonian + hamiltonian.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  const Eigen::VectorXcd phases =
      (-kI * t * es.eigenvalues().cast<Complex>()).array().exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

SpinState apply_unitary(const Operator& unitary, const SpinState& state) {
  if (unitary.rows() != state.dim()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  if (state.is_pure()) {
    Ket k = unitary * state.ket();
    k.normalize();
    return SpinState::pure(std::move(k));
  }
  Operator rho = unitary * state.density() * unitary.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return SpinState::mixed(std::move(rho));
}

SpinState evolve(const Operator& hamiltonian, double t, const SpinState& state) {
  return apply_unitary(propagator(hamiltonian, t), state);
}

double fidelity(const SpinState& a, const SpinState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  if (a.is_pure() && b.is_pure()) return std::norm(a.ket().dot(b.ket()));
  return (a.density() * b.density()).trace().real();
}

double max_abs(const Operator& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_hermitian(const Operator& m, double tol) {
  return m.rows() == m.cols() && max_abs(m - m.adjoint()) <= tol;
}

bool is_unitary(const Operator& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m.adjoint() * m - Operator::Identity(m.rows(), m.cols())) < tol;
}

double phase_aligned_distance(const Operator& a, const Operator& b) {
  return aligned_distance(a, b);
}

double phase_aligned_distance(const Ket& a, const Ket& b) { return aligned_distance(a, b); }

double trace_distance(const Operator& a, const Operator& b) {
  const Operator diff = a - b;
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace spincat
