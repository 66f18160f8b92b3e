#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spincat/sequence.hpp"

namespace spincat {

/// Invalid run configuration. `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

inline constexpr int kConfigSchema = 1;

struct SensitivityPoint {
  double tau_s = 0.0;
  double p_bar = 1.0;
  double contrast = 1.0;
};

struct CssSensitivityPoint {
  double tau_s = 0.0;
  double p_bar = 1.0;
  double slope_per_s = 0.0;  // max |dPz/dtau|
};

/// Everything a CLI run depends on. Defaults mirror the 173Yb experiment.
struct RunConfig {
  int schema = kConfigSchema;
  int two_f = 5;

  struct Control {
    double omega1_hz = 518.7;
    double ratio = -1.0;
    double css_omega1_hz = 285.0;
    double css_ratio = -2.0;
    // If set, the cat-pulse pair is derived from sigma+ control light instead.
    std::optional<double> alpha_v_au;
    std::optional<double> alpha_t_au;
    std::optional<double> intensity_w_m2;
  } control;

  struct Zeeman {
    std::string gamma_mode = "yb173";
    double gamma = 0.0;  // rad/s/T, custom mode only
    double b_tesla = 1.24e-6;
  } zeeman;

  struct Lattice {
    double omega_zz_hz = 1.5;  // at mean intensity
    std::optional<double> alpha_t_au;
    std::optional<double> intensity_w_m2;
  } lattice;

  struct Ensemble {
    std::string dist = "delta";
    double rel_sigma = 0.05;
    int n_samples = 1000;
    std::uint64_t seed = 1;
    std::string policy = "monte_carlo";
    std::vector<double> samples;
  } ensemble;

  struct Noise {
    double dephase_rate = 0.0;
    double leak_rate = 0.0;
    double vacuum_rate = 0.0;
  } noise;

  struct Sweep {
    std::vector<double> tau_grid;
    std::vector<double> area_grid;
  } sweep;

  struct Measurement {
    std::optional<std::int64_t> n_atoms;  // empty = exact probabilities
  } measurement;

  struct Output {
    std::string format = "csv";
    std::string path = ".";
  } output;

  struct Sensitivity {
    std::vector<SensitivityPoint> points;
    std::vector<CssSensitivityPoint> css_points;
    std::optional<double> css_reference_t;
    bool simulate = false;
  } sensitivity;

  struct Wigner {
    int n_theta = 64;
    int n_phi = 128;
    std::string state = "cat";
  } wigner;

  std::string mode = "cat";
  int threads = 0;

  SpinQuantum spin() const { return SpinQuantum(two_f); }
  double gamma() const;
  ZeemanParams zeeman_params() const { return {gamma(), zeeman.b_tesla}; }
  PulseSpec cat_pulse() const;
  PulseSpec css_pulse() const;
  double omega_zz() const;  // rad/s at mean intensity
  EnsembleModel ensemble_model() const;
  NoiseChannels noise_channels() const { return {noise.leak_rate, noise.dephase_rate, noise.vacuum_rate}; }
  RamseyConfig ramsey_config(RamseyMode m) const;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
};

/// Ramsey records for the config; seeded binomial counts when
/// measurement.n_atoms is set.
std::vector<FringeRecord> simulate_ramsey(const RunConfig& config, std::span<const double> taus, RamseyMode mode);

/// Strict parse: unknown keys, wrong types and missing `schema` are errors.
RunConfig parse_config(std::string_view json_text);

/// Fully resolved document (all defaults explicit); parse_config of it gives back the same run.
std::string resolved_config_json(const RunConfig& config);

/// FNV-1a 64 of the resolved document, as 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace spincat
