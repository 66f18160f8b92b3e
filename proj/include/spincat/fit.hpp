#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spincat/sequence.hpp"

namespace spincat {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Damped least squares
// ---------------------------------------------------------------------------

/// r(p) and its Jacobian dr/dp; residuals are already weighted.
struct LeastSquaresProblem {
  std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residual, Eigen::MatrixXd& jacobian)>
      evaluate;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct LeastSquaresOptions {
  int max_iterations = 200;
  double step_tolerance = 1e-10;
};

struct LeastSquaresSolution {
  Eigen::VectorXd params;
  Eigen::MatrixXd jtj;  // at the optimum
  double cost = 0.0;    // 0.5 * |r|^2
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;  // cost after each accepted step
};

/// Levenberg-Marquardt with box constraints enforced by projection. The
/// damping blends gradient descent (large lambda) and Gauss-Newton (small).
LeastSquaresSolution levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd start,
                                         const LeastSquaresOptions& options = {});

// ---------------------------------------------------------------------------
// Fringe and decay models
// ---------------------------------------------------------------------------

enum class ModelKind { cosine, harmonics_135, exponential, double_exponential };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

enum class Branch { plus, minus };

struct FitParameter {
  std::string name;
  double value = 0.0;
  double sigma = 0.0;
};

struct FitResult {
  ModelKind model = ModelKind::cosine;
  std::vector<FitParameter> params;
  Eigen::MatrixXd covariance;
  double residual_norm = 0.0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  std::vector<std::string> warnings;
  std::vector<double> cost_history;

  const FitParameter& param(std::string_view name) const;
  double value(std::string_view name) const { return param(name).value; }
  double sigma(std::string_view name) const { return param(name).sigma; }
  bool has(std::string_view name) const;
};

/// Optional per-point weights (1/sigma^2). Empty means unit weights.
struct FitOptions {
  std::vector<double> weights;
  LeastSquaresOptions solver;
};

/// Dominant angular frequency of a (near-)uniformly sampled signal from the
/// oversampled periodogram of the linearly detrended data.
double seed_frequency(std::span<const double> tau, std::span<const double> values);

/// P(tau) = (p_bar/2) [1 + contrast cos(omega tau + phase)].
FitResult fit_cosine(std::span<const double> tau, std::span<const double> values,
                     const FitOptions& options = {});
FitResult fit_cosine(std::span<const FringeRecord> records, Branch branch, const FitOptions& options = {});

/// P(tau) = (p_bar/2) [1 +- sum_{k=1,3,5} c_k cos(k omega tau + phi_k)], sign by branch.
FitResult fit_harmonics(std::span<const double> tau, std::span<const double> values, Branch branch,
                        const FitOptions& options = {});
FitResult fit_harmonics(std::span<const FringeRecord> records, Branch branch,
                        const FitOptions& options = {});

struct DecayOptions {
  /// Fix the asymptote instead of fitting it.
  std::optional<double> fixed_offset;
  FitOptions fit;
};

/// exponential: A exp(-tau/T) + c.
/// double_exponential: A1 exp(-tau/T1) + A2 exp(-tau/T2) + c with T1 <= T2.
FitResult fit_decay(std::span<const double> tau, std::span<const double> values, ModelKind model,
                    const DecayOptions& options = {});

/// Evaluates a fitted cosine / harmonic model (branch sign for harmonics).
double evaluate_fringe(const FitResult& fit, double tau, Branch branch = Branch::plus);

/// Mean of the parameters both branch fits share (phases excluded); sigmas
/// combine as half the quadrature sum.
FitResult average_branches(const FitResult& plus, const FitResult& minus);

/// Extract one branch (or p_plus + p_minus) from engine records.
std::vector<double> branch_values(std::span<const FringeRecord> records, Branch branch);
std::vector<double> record_taus(std::span<const FringeRecord> records);

}  // namespace spincat
