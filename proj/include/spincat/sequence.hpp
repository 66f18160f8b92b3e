#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spincat/light_shift.hpp"
#include "spincat/spin_algebra.hpp"

namespace spincat {

/// Control pulse about x. Area is |omega1| * duration (radians).
struct PulseSpec {
  double omega1 = 1.0;  // rad/s
  double omega2 = 0.0;  // rad/s
  double area = 0.0;    // rad

  double duration() const;
  double ratio() const { return omega2 / omega1; }
  PulseSpec with_area(double a) const { return {omega1, omega2, a}; }
};

Operator pulse_propagator(const PulseSpec& pulse, const SpinQuantum& spin);
SpinState apply_pulse(const SpinState& state, const PulseSpec& pulse);

/// P_{+F}(area) starting from |F,F> for omega2/omega1 = ratio.
std::vector<double> rabi_scan(const SpinQuantum& spin, double ratio, std::span<const double> areas);

enum class IntensityDistribution { delta, gaussian, empirical };
enum class EnsemblePolicy { monte_carlo, quadrature };

/// Distribution p(I) of lattice intensity seen by the atoms, plus how it is
/// averaged over. Gaussian draws are truncated at I = 0.
struct EnsembleModel {
  IntensityDistribution distribution = IntensityDistribution::delta;
  double mean = 1.0;
  double rel_sigma = 0.05;
  std::vector<double> samples;  // empirical only
  int n_samples = 1000;
  std::uint64_t seed = 0;
  EnsemblePolicy policy = EnsemblePolicy::monte_carlo;

  static EnsembleModel delta(double intensity);
  static EnsembleModel gaussian(double mean, double rel_sigma, int n_samples, std::uint64_t seed,
                                EnsemblePolicy policy = EnsemblePolicy::monte_carlo);
  static EnsembleModel empirical(std::vector<double> samples);

  void validate() const;
};

/// Intensity nodes with normalized weights.
struct EnsembleNodes {
  std::vector<double> intensity;
  std::vector<double> weight;
};

/// Monte Carlo draws (one independent stream per sample index), empirical
/// samples, or composite Gauss-Legendre nodes fine enough to resolve
/// `max_phase_per_intensity` radians of phase per unit intensity.
EnsembleNodes ensemble_nodes(const EnsembleModel& model, double max_phase_per_intensity = 0.0);

/// Tensor lattice shift omega_zz(I) in rad/s.
using TensorShiftMap = std::function<double(double)>;
TensorShiftMap linear_tensor_shift(double omega_zz_per_intensity);

/// Evolution under gamma B Fz + omega_zz Fz^2 (diagonal, closed-form phases).
SpinState free_evolution(const SpinState& state, double tau, const ZeemanParams& zeeman,
                         double omega_zz);

/// Average of free_evolution over the lattice-intensity ensemble.
SpinState ensemble_free_evolution(const SpinState& state, double tau, const ZeemanParams& zeeman,
                                  const EnsembleModel& ensemble, const TensorShiftMap& omega_zz_of_intensity);

struct NoiseChannels {
  double leak_rate = 0.0;                // 1/s
  double collective_dephase_rate = 0.0;  // 1/s
  double vacuum_loss_rate = 0.0;         // 1/s

  void validate() const;
};

/// Which |m><-m| coherences collective dephasing acts on.
enum class DephasingScope { stretched_pair, mirror_pairs };

/// Density matrix after phenomenological noise. `rho` has trace `tracked`;
/// the missing weight has leaked out of the measured manifold.
struct NoisyDensity {
  Operator rho;
  double tracked = 1.0;
  double survival = 1.0;
};

NoisyDensity apply_noise(const Operator& rho, double tau, const NoiseChannels& noise,
                         DephasingScope scope = DephasingScope::stretched_pair);

struct AtomCounts {
  std::int64_t n = 0;
  std::int64_t n_plus = 0;
  std::int64_t n_minus = 0;
};

struct FringeRecord {
  double tau = 0.0;
  double p_plus = 0.0;
  double p_minus = 0.0;
  double p_in = 0.0;
  std::optional<AtomCounts> counts;
};

enum class RamseyMode { cat, css };

struct RamseyConfig {
  SpinQuantum spin{5};
  PulseSpec pulse{constants::two_pi * 518.7, -constants::two_pi * 518.7, constants::pi / 2.0};
  ZeemanParams zeeman{constants::yb173_gamma, 1.24e-6};
  EnsembleModel ensemble = EnsembleModel::delta(1.0);
  TensorShiftMap omega_zz_of_intensity = linear_tensor_shift(0.0);
  NoiseChannels noise;
  /// 0 picks hardware concurrency; output order never depends on it.
  int threads = 0;
};

/// Full Ramsey protocol per tau: pi/2 pulse, interrogation, noise, pi/2
/// pulse, read P_{+F}; pi swap, read P_{-F}. Pulses are back to back at tau = 0.
std::vector<FringeRecord> ramsey(std::span<const double> taus, const RamseyConfig& cfg, RamseyMode mode);
std::vector<FringeRecord> ramsey_cat(std::span<const double> taus, const RamseyConfig& cfg);
std::vector<FringeRecord> ramsey_css(std::span<const double> taus, const RamseyConfig& cfg);

/// Sequential binomial draws N+ ~ B(N, p+), N- ~ B(N - N+, p-/(1-p+)).
FringeRecord measure_populations(const FringeRecord& record, std::int64_t atoms, std::uint64_t seed);

struct MixtureWeight {
  int two_abs_m = 0;
  double weight = 0.0;
};

/// w_{+-m} = C(2F, F+|m|) / 2^{2F-1}, ascending |m|. An m = 0 entry (integer F)
/// carries C(2F, F) / 2^{2F}.
std::vector<MixtureWeight> mixture_weights(const SpinQuantum& spin);

/// sum_m w_m |psi_m><psi_m| with psi_m = (|m> + e^{i phase_m}|-m>)/sqrt(2),
/// phases in mixture_weights order (ignored for m = 0).
Operator mixture_density(const SpinQuantum& spin, std::span<const double> phases);

/// 64-bit stream seed for sample `index` of a run seeded with `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace spincat
