#include "spincat/metrology.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spincat/constants.hpp"
#include "spincat/numerics.hpp"

namespace spincat {

namespace {

constexpr double kEigenCutoff = 1e-12;

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Associated Legendre P_l^m(x), m >= 0, Condon-Shortley phase included.
double associated_legendre(int l, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * s;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmm1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmm1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = ((2.0 * ll - 1.0) * x * pmm1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmm1;
    pmm1 = pll;
  }
  return pll;
}

}  // namespace

double qfi_pure(const SpinState& state, const Operator& generator) {
  if (!state.is_pure()) {
    throw ContractViolation("qfi_pure: state is mixed; use qfi_mixed");
  }
  const Ket& k = state.ket();
  const Ket gk = generator * k;
  const double mean = k.dot(gk).real();
  const double second = gk.squaredNorm();
  return 4.0 * (second - mean * mean);
}

double qfi_mixed(const Operator& rho, const Operator& generator) {
  if (!is_hermitian(rho, 1e-10)) throw ContractViolation("qfi_mixed: rho is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Operator> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd& lambda = es.eigenvalues();
  if (lambda.minCoeff() < -1e-10) throw ContractViolation("qfi_mixed: rho is not positive");
  const Operator g = es.eigenvectors().adjoint() * generator * es.eigenvectors();
  double sum = 0.0;
  const auto d = lambda.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double li = lambda(i) < kEigenCutoff ? 0.0 : lambda(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double lj = lambda(j) < kEigenCutoff ? 0.0 : lambda(j);
      const double s = li + lj;
      if (s <= 0.0) continue;
      const double diff = li - lj;
      sum += diff * diff / s * std::norm(g(i, j));
    }
  }
  return 2.0 * sum;
}

double qfi_mixed(const SpinState& state, const Operator& generator) {
  return qfi_mixed(state.density(), generator);
}

namespace {

double accumulate_cfi(const std::vector<double>& p, const std::vector<double>& dp) {
  if (p.size() != dp.size()) throw std::invalid_argument("cfi_phase: outcome count mismatch");
  double info = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < -1e-12) throw std::domain_error("cfi_phase: negative outcome probability");
    if (p[i] <= 1e-15) {
      if (std::abs(dp[i]) > 1e-9) return std::numeric_limits<double>::infinity();
      continue;
    }
    info += dp[i] * dp[i] / p[i];
  }
  return info;
}

}  // namespace

double cfi_phase(const OutcomeModel& probabilities, double phi, double step) {
  const std::vector<double> p = probabilities(phi);
  const std::vector<double> hi = probabilities(phi + step);
  const std::vector<double> lo = probabilities(phi - step);
  if (hi.size() != p.size() || lo.size() != p.size()) {
    throw std::invalid_argument("cfi_phase: outcome count changes with phase");
  }
  std::vector<double> dp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) dp[i] = (hi[i] - lo[i]) / (2.0 * step);
  return accumulate_cfi(p, dp);
}

double cfi_phase(const OutcomeModel& probabilities, const OutcomeModel& derivatives, double phi) {
  return accumulate_cfi(probabilities(phi), derivatives(phi));
}

OutcomeModel cat_fringe_outcomes(double p_bar, double contrast, double offset) {
  return [=](double phi) {
    const double c = contrast * std::cos(phi + offset);
    return std::vector<double>{0.5 * p_bar * (1.0 + c), 0.5 * p_bar * (1.0 - c), 1.0 - p_bar};
  };
}

OutcomeModel cat_fringe_derivatives(double p_bar, double contrast, double offset) {
  return [=](double phi) {
    const double s = contrast * std::sin(phi + offset);
    return std::vector<double>{-0.5 * p_bar * s, 0.5 * p_bar * s, 0.0};
  };
}

namespace {

SensitivityReport limits(const SpinQuantum& spin, double gamma, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("sensitivity: tau must be > 0");
  if (gamma == 0.0) throw std::invalid_argument("sensitivity: gamma must be nonzero");
  const double scale = std::abs(gamma) * tau;
  const double two_f = spin.two_f();
  SensitivityReport r;
  r.tau = tau;
  r.limit_hl = 1.0 / (two_f * scale);
  r.limit_sql = 1.0 / (std::sqrt(two_f) * scale);
  return r;
}

}  // namespace

SensitivityReport sensitivity_cat(double p_bar, double contrast, const SpinQuantum& spin, double gamma,
                                  double tau) {
  if (!(contrast > 0.0)) throw std::domain_error("sensitivity_cat: contrast must be > 0");
  if (!(p_bar > 0.0)) throw std::domain_error("sensitivity_cat: p_bar must be > 0");
  SensitivityReport r = limits(spin, gamma, tau);
  const double two_f = spin.two_f();
  r.fisher_quantum = two_f * two_f;
  r.fisher_classical = two_f * two_f * p_bar * contrast * contrast;
  r.sigma_b = 1.0 / (contrast * std::sqrt(p_bar)) / two_f / (std::abs(gamma) * tau);
  return r;
}

SensitivityReport sensitivity_css(double p_bar, double dpz_dtau_max, double gamma, double b_field,
                                  double tau, const SpinQuantum& spin) {
  if (!(std::abs(dpz_dtau_max) > 0.0)) throw std::domain_error("sensitivity_css: zero slope");
  if (!(p_bar > 0.0)) throw std::domain_error("sensitivity_css: p_bar must be > 0");
  if (b_field == 0.0) throw std::domain_error("sensitivity_css: B must be nonzero");
  SensitivityReport r = limits(spin, gamma, tau);
  const double slope_ratio = std::abs(dpz_dtau_max) / std::abs(gamma * b_field);
  r.fisher_quantum = spin.two_f();
  r.fisher_classical = slope_ratio * slope_ratio * p_bar;
  r.sigma_b = (1.0 / slope_ratio) / std::sqrt(p_bar) / (std::abs(gamma) * tau);
  return r;
}

double enhancement_db(double sigma_reference, double sigma) {
  return 20.0 * std::log10(sigma_reference / sigma);
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2, int two_j, int two_m) {
  if (two_m1 + two_m2 != two_m) return 0.0;
  if (std::abs(two_m1) > two_j1 || std::abs(two_m2) > two_j2 || std::abs(two_m) > two_j) return 0.0;
  if ((two_j1 + two_m1) % 2 || (two_j2 + two_m2) % 2 || (two_j + two_m) % 2) return 0.0;
  if (two_j < std::abs(two_j1 - two_j2) || two_j > two_j1 + two_j2) return 0.0;
  if ((two_j1 + two_j2 + two_j) % 2) return 0.0;

  const int a = (two_j1 + two_j2 - two_j) / 2;  // j1 + j2 - J
  const int b = (two_j1 - two_m1) / 2;          // j1 - m1
  const int c = (two_j2 + two_m2) / 2;          // j2 + m2
  const int e = (two_j - two_j2 + two_m1) / 2;  // J - j2 + m1
  const int f = (two_j - two_j1 - two_m2) / 2;  // J - j1 - m2

  const double log_pref =
      0.5 * (std::log(two_j + 1.0) + log_factorial((two_j + two_j1 - two_j2) / 2) +
             log_factorial((two_j - two_j1 + two_j2) / 2) + log_factorial(a) -
             log_factorial((two_j1 + two_j2 + two_j) / 2 + 1) + log_factorial((two_j + two_m) / 2) +
             log_factorial((two_j - two_m) / 2) + log_factorial(b) +
             log_factorial((two_j1 + two_m1) / 2) + log_factorial((two_j2 - two_m2) / 2) +
             log_factorial(c));

  const int k_min = std::max({0, -e, -f});
  const int k_max = std::min({a, b, c});
  double sum = 0.0;
  for (int k = k_min; k <= k_max; ++k) {
    const double log_term = log_factorial(k) + log_factorial(a - k) + log_factorial(b - k) +
                            log_factorial(c - k) + log_factorial(e + k) + log_factorial(f + k);
    const double term = std::exp(log_pref - log_term);
    sum += (k % 2 == 0) ? term : -term;
  }
  return sum;
}

Complex spherical_harmonic(int k, int q, double theta, double phi) {
  if (k < 0 || std::abs(q) > k) throw std::domain_error("spherical_harmonic: |q| > k");
  const int aq = std::abs(q);
  const double norm = std::sqrt((2.0 * k + 1.0) / (4.0 * constants::pi) *
                                std::exp(log_factorial(k - aq) - log_factorial(k + aq)));
  const double p = associated_legendre(k, aq, std::cos(theta));
  Complex y = norm * p * std::exp(Complex{0.0, aq * phi});
  if (q < 0) {
    y = std::conj(y);
    if (aq % 2) y = -y;
  }
  return y;
}

WignerExpansion::WignerExpansion(const Operator& rho) : two_f_(static_cast<int>(rho.rows()) - 1) {
  if (rho.rows() != rho.cols() || rho.rows() < 2) {
    throw std::invalid_argument("WignerExpansion: rho must be square with dim >= 2");
  }
  const SpinQuantum spin(two_f_);
  const int d = spin.dim();
  coefficients_.assign(static_cast<std::size_t>((two_f_ + 1) * (two_f_ + 1)), Complex{});
  // (T_kq)_{m m'} = (-1)^{F-m'} <F m; F -m' | k q>, so
  // rho_kq = Tr(rho T_kq^dagger) = sum_{m m'} rho_{m m'} conj((T_kq)_{m m'}).
  for (int k = 0; k <= two_f_; ++k) {
    for (int q = -k; q <= k; ++q) {
      Complex acc{};
      for (int i = 0; i < d; ++i) {
        const int two_m = spin.two_m_at(i);
        for (int j = 0; j < d; ++j) {
          const int two_mp = spin.two_m_at(j);
          if (two_m - two_mp != 2 * q) continue;
          const int phase_exp = (two_f_ - two_mp) / 2;
          const double t = (phase_exp % 2 ? -1.0 : 1.0) *
                           clebsch_gordan(two_f_, two_m, two_f_, -two_mp, 2 * k, 2 * q);
          acc += rho(i, j) * t;
        }
      }
      coefficients_[static_cast<std::size_t>(k * k + q + k)] = acc;
    }
  }
}

Complex WignerExpansion::coefficient(int k, int q) const {
  if (k < 0 || k > two_f_ || std::abs(q) > k) throw std::out_of_range("WignerExpansion: bad (k, q)");
  return coefficients_[static_cast<std::size_t>(k * k + q + k)];
}

double WignerExpansion::operator()(double theta, double phi) const {
  Complex w{};
  for (int k = 0; k <= two_f_; ++k) {
    for (int q = -k; q <= k; ++q) {
      w += coefficients_[static_cast<std::size_t>(k * k + q + k)] * spherical_harmonic(k, q, theta, phi);
    }
  }
  return std::sqrt((two_f_ + 1.0) / (4.0 * constants::pi)) * w.real();
}

double WignerMap::integral() const {
  const double dphi = phi.empty() ? 0.0 : 2.0 * constants::pi / static_cast<double>(phi.size());
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    total += theta_weights[i] * values.row(static_cast<Eigen::Index>(i)).sum() * dphi;
  }
  return total;
}

WignerMap wigner_map(const Operator& rho, int n_theta, int n_phi, int threads) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("wigner_map: grid must be nonempty");
  const WignerExpansion expansion(rho);
  const GaussLegendreRule rule = gauss_legendre(n_theta);
  WignerMap map;
  // GL nodes ascend in cos(theta); reverse so theta ascends.
  for (int i = n_theta - 1; i >= 0; --i) {
    map.theta.push_back(std::acos(rule.nodes[static_cast<std::size_t>(i)]));
    map.theta_weights.push_back(rule.weights[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < n_phi; ++j) map.phi.push_back(2.0 * constants::pi * j / n_phi);
  map.values.resize(n_theta, n_phi);
  parallel_for(static_cast<std::size_t>(n_theta), threads, [&](std::size_t i) {
    for (int j = 0; j < n_phi; ++j) {
      map.values(static_cast<Eigen::Index>(i), j) = expansion(map.theta[i], map.phi[static_cast<std::size_t>(j)]);
    }
  });
  return map;
}

}  // namespace spincat
