#include "spincat/sequence.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "spincat/numerics.hpp"

namespace spincat {

namespace {

constexpr Complex kI{0.0, 1.0};

SpinQuantum spin_for_dim(int dim) { return SpinQuantum(dim - 1); }

double binomial_coefficient(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

// Gaussian truncated at zero: [lo, hi] covers all but ~1e-23 of the mass.
std::pair<double, double> gaussian_support(const EnsembleModel& m) {
  const double sigma = m.rel_sigma * m.mean;
  return {std::max(0.0, m.mean - 10.0 * sigma), m.mean + 10.0 * sigma};
}

bool degenerate_gaussian(const EnsembleModel& m) { return m.rel_sigma == 0.0 || m.mean == 0.0; }

std::pair<double, double> node_support(const EnsembleModel& m) {
  switch (m.distribution) {
    case IntensityDistribution::delta:
      return {m.mean, m.mean};
    case IntensityDistribution::gaussian:
      if (degenerate_gaussian(m)) return {m.mean, m.mean};
      return gaussian_support(m);
    case IntensityDistribution::empirical: {
      const auto [lo, hi] = std::minmax_element(m.samples.begin(), m.samples.end());
      return {*lo, *hi};
    }
  }
  return {m.mean, m.mean};
}

// Largest |d omega_zz / dI| over the support, sampled on a uniform grid.
double max_slope(const TensorShiftMap& map, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  constexpr int kProbe = 128;
  double best = 0.0;
  double prev = map(lo);
  for (int i = 1; i <= kProbe; ++i) {
    const double x = lo + (hi - lo) * i / kProbe;
    const double v = map(x);
    best = std::max(best, std::abs(v - prev) / ((hi - lo) / kProbe));
    prev = v;
  }
  return best;
}

}  // namespace

double PulseSpec::duration() const {
  if (area < 0.0 || !std::isfinite(area)) {
    throw std::invalid_argument("PulseSpec: area must be finite and >= 0");
  }
  if (area == 0.0) return 0.0;
  if (omega1 == 0.0) {
    throw std::invalid_argument("PulseSpec: omega1 = 0 cannot realize a nonzero area");
  }
  return area / std::abs(omega1);
}

Operator pulse_propagator(const PulseSpec& pulse, const SpinQuantum& spin) {
  const double t = pulse.duration();
  if (t == 0.0) return Operator::Identity(spin.dim(), spin.dim());
  return propagator(control_hamiltonian(pulse.omega1, pulse.omega2, spin), t);
}

SpinState apply_pulse(const SpinState& state, const PulseSpec& pulse) {
  return apply_unitary(pulse_propagator(pulse, spin_for_dim(state.dim())), state);
}

std::vector<double> rabi_scan(const SpinQuantum& spin, double ratio, std::span<const double> areas) {
  if (areas.empty()) throw std::invalid_argument("rabi_scan: area grid is empty");
  const Operator h = control_hamiltonian(1.0, ratio, spin);
  std::vector<double> out;
  out.reserve(areas.size());
  for (double a : areas) {
    if (a < 0.0) throw std::invalid_argument("rabi_scan: areas must be >= 0");
    out.push_back(std::norm(propagator(h, a).col(0)(0)));
  }
  return out;
}

EnsembleModel EnsembleModel::delta(double intensity) {
  EnsembleModel m;
  m.distribution = IntensityDistribution::delta;
  m.mean = intensity;
  m.n_samples = 1;
  return m;
}

EnsembleModel EnsembleModel::gaussian(double mean, double rel_sigma, int n_samples,
                                      std::uint64_t seed, EnsemblePolicy policy) {
  EnsembleModel m;
  m.distribution = IntensityDistribution::gaussian;
  m.mean = mean;
  m.rel_sigma = rel_sigma;
  m.n_samples = n_samples;
  m.seed = seed;
  m.policy = policy;
  return m;
}

EnsembleModel EnsembleModel::empirical(std::vector<double> samples) {
  EnsembleModel m;
  m.distribution = IntensityDistribution::empirical;
  m.n_samples = static_cast<int>(samples.size());
  m.samples = std::move(samples);
  return m;
}

void EnsembleModel::validate() const {
  switch (distribution) {
    case IntensityDistribution::delta:
      if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("EnsembleModel: intensity must be finite and >= 0");
      }
      break;
    case IntensityDistribution::gaussian:
      if (!(mean >= 0.0) || !std::isfinite(mean)) {
        throw std::invalid_argument("EnsembleModel: mean intensity must be finite and >= 0");
      }
      if (!(rel_sigma >= 0.0) || !std::isfinite(rel_sigma)) {
        throw std::invalid_argument("EnsembleModel: rel_sigma must be finite and >= 0");
      }
      if (n_samples < 1) throw std::invalid_argument("EnsembleModel: n_samples must be >= 1");
      break;
    case IntensityDistribution::empirical:
      if (samples.empty()) throw std::invalid_argument("EnsembleModel: empirical ensemble is empty");
      for (double s : samples) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
          throw std::invalid_argument("EnsembleModel: intensities must be finite and >= 0");
        }
      }
      break;
  }
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index).
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

EnsembleNodes ensemble_nodes(const EnsembleModel& model, double max_phase_per_intensity) {
  model.validate();
  EnsembleNodes out;
  switch (model.distribution) {
    case IntensityDistribution::delta:
      out.intensity = {model.mean};
      out.weight = {1.0};
      return out;
    case IntensityDistribution::empirical: {
      const double w = 1.0 / static_cast<double>(model.samples.size());
      out.intensity = model.samples;
      out.weight.assign(model.samples.size(), w);
      return out;
    }
    case IntensityDistribution::gaussian:
      break;
  }
  if (degenerate_gaussian(model)) {
    out.intensity = {model.mean};
    out.weight = {1.0};
    return out;
  }
  const double sigma = model.rel_sigma * model.mean;
  if (model.policy == EnsemblePolicy::monte_carlo) {
    const auto n = static_cast<std::size_t>(model.n_samples);
    out.intensity.resize(n);
    out.weight.assign(n, 1.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      std::mt19937_64 rng(split_seed(model.seed, i));
      std::normal_distribution<double> normal(model.mean, sigma);
      double x = normal(rng);
      for (int attempt = 0; x < 0.0 && attempt < 1000; ++attempt) x = normal(rng);
      out.intensity[i] = std::max(0.0, x);
    }
    return out;
  }

  // Composite Gauss-Legendre: each panel spans at most ~pi/2 of phase.
  const auto [lo, hi] = gaussian_support(model);
  constexpr int kOrder = 16;
  const double phase_span = std::abs(max_phase_per_intensity) * (hi - lo);
  const int panels = 8 + static_cast<int>(std::ceil(phase_span / (constants::pi / 2.0)));
  const GaussLegendreRule rule = gauss_legendre(kOrder);
  const double width = (hi - lo) / panels;
  out.intensity.reserve(static_cast<std::size_t>(panels) * kOrder);
  out.weight.reserve(static_cast<std::size_t>(panels) * kOrder);
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * width;
    for (int k = 0; k < kOrder; ++k) {
      const double x = a + 0.5 * width * (rule.nodes[k] + 1.0);
      const double z = (x - model.mean) / sigma;
      const double w = 0.5 * width * rule.weights[k] * std::exp(-0.5 * z * z);
      out.intensity.push_back(x);
      out.weight.push_back(w);
      total += w;
    }
  }
  for (double& w : out.weight) w /= total;
  return out;
}

TensorShiftMap linear_tensor_shift(double omega_zz_per_intensity) {
  return [omega_zz_per_intensity](double intensity) { return omega_zz_per_intensity * intensity; };
}

SpinState free_evolution(const SpinState& state, double tau, const ZeemanParams& zeeman,
                         double omega_zz) {
  const SpinQuantum spin = spin_for_dim(state.dim());
  Eigen::VectorXcd phase(spin.dim());
  for (int i = 0; i < spin.dim(); ++i) {
    const double m = spin.m_at(i);
    phase(i) = std::exp(-kI * tau * (zeeman.larmor() * m + omega_zz * m * m));
  }
  if (state.is_pure()) {
    Ket k = phase.asDiagonal() * state.ket();
    k.normalize();
    return SpinState::pure(std::move(k));
  }
  Operator rho = phase.asDiagonal() * state.density() * phase.conjugate().asDiagonal();
  return SpinState::mixed(std::move(rho));
}

namespace {

// Ensemble-averaged phase kernel K_ab = sum_n w_n exp(-i tau (E_a(n) - E_b(n)))
// with E_a = Omega0 m_a + omega_zz(I_n) m_a^2, so rho(tau) = rho(0) o K.
Operator ensemble_kernel(const SpinQuantum& spin, double tau, const ZeemanParams& zeeman,
                         const EnsembleNodes& nodes, const TensorShiftMap& omega_zz_of_intensity) {
  const int d = spin.dim();
  Operator kernel = Operator::Zero(d, d);
  Eigen::VectorXcd v(d);
  for (std::size_t n = 0; n < nodes.intensity.size(); ++n) {
    const double wzz = omega_zz_of_intensity(nodes.intensity[n]);
    for (int i = 0; i < d; ++i) {
      const double m = spin.m_at(i);
      v(i) = std::exp(-kI * tau * (zeeman.larmor() * m + wzz * m * m));
    }
    kernel.noalias() += nodes.weight[n] * (v * v.adjoint());
  }
  return kernel;
}

EnsembleNodes nodes_for(const SpinQuantum& spin, double tau, const EnsembleModel& ensemble,
                        const TensorShiftMap& omega_zz_of_intensity) {
  double rate = 0.0;
  if (ensemble.distribution == IntensityDistribution::gaussian &&
      ensemble.policy == EnsemblePolicy::quadrature && !degenerate_gaussian(ensemble)) {
    const auto [lo, hi] = node_support(ensemble);
    const double f = spin.value();
    rate = f * f * std::abs(tau) * max_slope(omega_zz_of_intensity, lo, hi);
  }
  return ensemble_nodes(ensemble, rate);
}

Operator evolve_with_nodes(const Operator& rho, double tau, const ZeemanParams& zeeman,
                           const EnsembleNodes& nodes, const TensorShiftMap& map) {
  const SpinQuantum spin = spin_for_dim(static_cast<int>(rho.rows()));
  const Operator kernel = ensemble_kernel(spin, tau, zeeman, nodes, map);
  Operator out = rho.cwiseProduct(kernel);
  return 0.5 * (out + out.adjoint());
}

}  // namespace

SpinState ensemble_free_evolution(const SpinState& state, double tau, const ZeemanParams& zeeman,
                                  const EnsembleModel& ensemble,
                                  const TensorShiftMap& omega_zz_of_intensity) {
  const SpinQuantum spin = spin_for_dim(state.dim());
  const EnsembleNodes nodes = nodes_for(spin, tau, ensemble, omega_zz_of_intensity);
  if (nodes.intensity.empty()) throw std::invalid_argument("ensemble_free_evolution: empty ensemble");
  return SpinState::mixed(evolve_with_nodes(state.density(), tau, zeeman, nodes, omega_zz_of_intensity));
}

void NoiseChannels::validate() const {
  for (double r : {leak_rate, collective_dephase_rate, vacuum_loss_rate}) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw std::invalid_argument("NoiseChannels: rates must be finite and >= 0");
    }
  }
}

NoisyDensity apply_noise(const Operator& rho, double tau, const NoiseChannels& noise,
                         DephasingScope scope) {
  noise.validate();
  const int d = static_cast<int>(rho.rows());
  NoisyDensity out;
  out.rho = rho;
  const double coherence = std::exp(-noise.collective_dephase_rate * tau);
  if (scope == DephasingScope::stretched_pair) {
    out.rho(0, d - 1) *= coherence;
    out.rho(d - 1, 0) *= coherence;
  } else {
    for (int i = 0; i < d; ++i) {
      const int j = d - 1 - i;
      if (i != j) out.rho(i, j) *= coherence;
    }
  }
  out.tracked = std::exp(-noise.leak_rate * tau);
  out.rho *= out.tracked;
  out.survival = std::exp(-noise.vacuum_loss_rate * tau);
  return out;
}

std::vector<FringeRecord> ramsey(std::span<const double> taus, const RamseyConfig& cfg,
                                 RamseyMode mode) {
  const double ratio = cfg.pulse.ratio();
  if (mode == RamseyMode::cat && std::abs(std::abs(ratio) - 1.0) > 1e-12) {
    throw std::invalid_argument("ramsey_cat: pulse ratio omega2/omega1 must be -1 (or +1)");
  }
  if (mode == RamseyMode::css && std::abs(std::abs(ratio) - 2.0) > 1e-12) {
    throw std::invalid_argument("ramsey_css: pulse ratio omega2/omega1 must be -2 (or +2)");
  }
  cfg.ensemble.validate();
  cfg.noise.validate();
  for (double t : taus) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("ramsey: tau must be >= 0");
  }

  const SpinQuantum& spin = cfg.spin;
  const Operator half = pulse_propagator(cfg.pulse.with_area(constants::pi / 2.0), spin);
  const Operator swap = pulse_propagator(cfg.pulse.with_area(constants::pi), spin);
  const Ket prepared = half.col(0);
  const Operator rho0 = prepared * prepared.adjoint();
  const DephasingScope scope =
      mode == RamseyMode::cat ? DephasingScope::stretched_pair : DephasingScope::mirror_pairs;

  // Monte Carlo / empirical nodes do not depend on tau; draw them once.
  const bool tau_dependent_nodes = cfg.ensemble.distribution == IntensityDistribution::gaussian &&
                                   cfg.ensemble.policy == EnsemblePolicy::quadrature;
  EnsembleNodes shared;
  if (!tau_dependent_nodes) shared = ensemble_nodes(cfg.ensemble);

  std::vector<FringeRecord> out(taus.size());
  parallel_for(taus.size(), cfg.threads, [&](std::size_t i) {
    const double tau = taus[i];
    const EnsembleNodes nodes =
        tau_dependent_nodes ? nodes_for(spin, tau, cfg.ensemble, cfg.omega_zz_of_intensity) : EnsembleNodes{};
    const Operator interrogated = evolve_with_nodes(rho0, tau, cfg.zeeman,
                                                    tau_dependent_nodes ? nodes : shared,
                                                    cfg.omega_zz_of_intensity);
    const NoisyDensity noisy = apply_noise(interrogated, tau, cfg.noise, scope);
    const Operator recombined = half * noisy.rho * half.adjoint();
    const Operator swapped = swap * recombined * swap.adjoint();
    FringeRecord r;
    r.tau = tau;
    r.p_plus = std::clamp(recombined(0, 0).real(), 0.0, 1.0);
    r.p_minus = std::clamp(swapped(0, 0).real(), 0.0, 1.0);
    r.p_in = 1.0 - r.p_plus - r.p_minus;
    out[i] = r;
  });
  return out;
}

std::vector<FringeRecord> ramsey_cat(std::span<const double> taus, const RamseyConfig& cfg) {
  return ramsey(taus, cfg, RamseyMode::cat);
}

std::vector<FringeRecord> ramsey_css(std::span<const double> taus, const RamseyConfig& cfg) {
  return ramsey(taus, cfg, RamseyMode::css);
}

FringeRecord measure_populations(const FringeRecord& record, std::int64_t atoms, std::uint64_t seed) {
  if (atoms < 1) throw std::invalid_argument("measure_populations: atom number must be >= 1");
  std::mt19937_64 rng(split_seed(seed, 0));
  const double p_plus = std::clamp(record.p_plus, 0.0, 1.0);
  const double p_minus = std::clamp(record.p_minus, 0.0, 1.0);
  std::binomial_distribution<std::int64_t> draw_plus(atoms, p_plus);
  const std::int64_t n_plus = draw_plus(rng);
  const double rest = 1.0 - p_plus;
  const double cond = rest > 0.0 ? std::clamp(p_minus / rest, 0.0, 1.0) : 0.0;
  std::binomial_distribution<std::int64_t> draw_minus(atoms - n_plus, cond);
  const std::int64_t n_minus = draw_minus(rng);

  FringeRecord out = record;
  out.counts = AtomCounts{atoms, n_plus, n_minus};
  out.p_plus = static_cast<double>(n_plus) / static_cast<double>(atoms);
  out.p_minus = static_cast<double>(n_minus) / static_cast<double>(atoms);
  out.p_in = 1.0 - out.p_plus - out.p_minus;
  return out;
}

std::vector<MixtureWeight> mixture_weights(const SpinQuantum& spin) {
  const int two_f = spin.two_f();
  std::vector<MixtureWeight> out;
  const double norm = std::ldexp(1.0, two_f);  // 2^{2F}
  for (int two_abs_m = two_f % 2; two_abs_m <= two_f; two_abs_m += 2) {
    const int k = (two_f + two_abs_m) / 2;  // F + |m|
    const double c = binomial_coefficient(two_f, k);
    out.push_back({two_abs_m, two_abs_m == 0 ? c / norm : 2.0 * c / norm});
  }
  return out;
}

Operator mixture_density(const SpinQuantum& spin, std::span<const double> phases) {
  const std::vector<MixtureWeight> weights = mixture_weights(spin);
  if (phases.size() != weights.size()) {
    throw std::invalid_argument("mixture_density: need one phase per |m| subspace");
  }
  const int d = spin.dim();
  Operator rho = Operator::Zero(d, d);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const int two_m = weights[k].two_abs_m;
    const int a = spin.index_of(two_m);
    if (two_m == 0) {
      rho(a, a) += weights[k].weight;
      continue;
    }
    const int b = spin.index_of(-two_m);
    Ket psi = Ket::Zero(d);
    psi(a) = 1.0 / std::sqrt(2.0);
    psi(b) = std::exp(kI * phases[k]) / std::sqrt(2.0);
    rho += weights[k].weight * psi * psi.adjoint();
  }
  return rho;
}

}  // namespace spincat
