#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spincat/spin_algebra.hpp"

namespace spincat {

/// 4 Var(G) for a pure state. Throws ContractViolation for mixed input.
double qfi_pure(const SpinState& state, const Operator& generator);

/// Symmetric-logarithmic-derivative QFI,
///   2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|G|j>|^2,
/// eigenvalues below 1e-12 treated as zero.
double qfi_mixed(const Operator& rho, const Operator& generator);
double qfi_mixed(const SpinState& state, const Operator& generator);

/// Outcome probabilities P_i(phi) for a phase-estimation readout.
using OutcomeModel = std::function<std::vector<double>(double)>;

/// Central-difference step for cfi_phase derivatives (rad).
inline constexpr double kCfiStep = 1e-6;

/// I_phi = sum_i (dP_i/dphi)^2 / P_i. Outcomes with P_i = 0 contribute 0 when
/// their derivative vanishes too; otherwise the result is +infinity.
double cfi_phase(const OutcomeModel& probabilities, double phi, double step = kCfiStep);
double cfi_phase(const OutcomeModel& probabilities, const OutcomeModel& derivatives, double phi);

/// Cat Ramsey readout {P_+F, P_-F, P_in} with P_+-F = (p_bar/2)(1 +- C cos(phi + offset)).
OutcomeModel cat_fringe_outcomes(double p_bar, double contrast, double offset = 0.0);
OutcomeModel cat_fringe_derivatives(double p_bar, double contrast, double offset = 0.0);

struct SensitivityReport {
  double tau = 0.0;               // s
  double sigma_b = 0.0;           // T
  double limit_sql = 0.0;         // T
  double limit_hl = 0.0;          // T
  double fisher_classical = 0.0;  // per single-spin phase gamma B tau
  double fisher_quantum = 0.0;    // of the ideal probe state
};

/// sigma = 1/(C sqrt(P)) * 1/(2F) * 1/(|gamma| tau).
SensitivityReport sensitivity_cat(double p_bar, double contrast, const SpinQuantum& spin, double gamma,
                                  double tau);

/// sigma = (gamma B / |dPz/dtau|_max) * 1/sqrt(P) * 1/(|gamma| tau).
SensitivityReport sensitivity_css(double p_bar, double dpz_dtau_max, double gamma, double b_field,
                                  double tau, const SpinQuantum& spin);

/// 20 log10(sigma_reference / sigma), i.e. the gain in variance in dB.
double enhancement_db(double sigma_reference, double sigma);

/// Clebsch-Gordan <j1 m1; j2 m2 | J M>, all arguments doubled.
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m);

/// Y_kq(theta, phi) with the Condon-Shortley phase.
Complex spherical_harmonic(int k, int q, double theta, double phi);

/// Multipole coefficients rho_kq = Tr(rho T_kq^dagger) of a spin-F density
/// matrix, k = 0..2F, q = -k..k.
class WignerExpansion {
 public:
  explicit WignerExpansion(const Operator& rho);

  /// W(theta, phi) = sqrt((2F+1)/4pi) sum_kq rho_kq Y_kq, so that the
  /// integral over the sphere equals Tr rho.
  double operator()(double theta, double phi) const;
  Complex coefficient(int k, int q) const;
  int max_rank() const noexcept { return two_f_; }

 private:
  int two_f_;
  std::vector<Complex> coefficients_;  // index k*k + (q + k)
};

struct WignerMap {
  std::vector<double> theta;    // ascending, Gauss-Legendre nodes in cos(theta)
  std::vector<double> phi;      // equispaced on [0, 2pi)
  std::vector<double> theta_weights;  // Gauss-Legendre weights in cos(theta)
  Eigen::MatrixXd values;       // values(i, j) = W(theta[i], phi[j])
  std::string convention = "multipole; integral over sphere = Tr(rho)";

  double integral() const;
  double min_value() const { return values.minCoeff(); }
  double max_value() const { return values.maxCoeff(); }
};

WignerMap wigner_map(const Operator& rho, int n_theta, int n_phi, int threads = 1);

}  // namespace spincat
