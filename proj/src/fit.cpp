#include "spincat/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spincat {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kContrastMax = 1.2;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clamp_to(const Eigen::VectorXd& p, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return p.cwiseMax(lo).cwiseMin(hi);
}

double wrap_phase(double phi) {
  double w = std::remainder(phi, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

LeastSquaresSolution levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd start,
                                         const LeastSquaresOptions& options) {
  const Eigen::Index np = start.size();
  const Eigen::VectorXd lo = problem.lower.size() == np ? problem.lower
                                                        : Eigen::VectorXd::Constant(np, -kInf);
  const Eigen::VectorXd hi = problem.upper.size() == np ? problem.upper
                                                        : Eigen::VectorXd::Constant(np, kInf);
  LeastSquaresSolution sol;
  Eigen::VectorXd p = clamp_to(start, lo, hi);
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  problem.evaluate(p, r, jac);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw FitError("levenberg_marquardt: non-finite residual at start");

  Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::VectorXd grad = jac.transpose() * r;
  double lambda = 1e-3;
  sol.cost_history.push_back(cost);

  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (cost <= 1e-32 * static_cast<double>(r.size())) {
      sol.converged = true;
      break;
    }
    const Eigen::VectorXd diag = jtj.diagonal();
    const double floor = 1e-12 * std::max(diag.maxCoeff(), 1e-300);
    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index i = 0; i < np; ++i) a(i, i) += lambda * std::max(diag(i), floor);
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      const Eigen::VectorXd candidate = clamp_to(p + step, lo, hi);
      problem.evaluate(candidate, r_new, jac_new);
      const double cost_new = 0.5 * r_new.squaredNorm();
      if (std::isfinite(cost_new) && cost_new <= cost) {
        const double moved = (candidate - p).norm();
        const double reduction = cost - cost_new;
        p = candidate;
        r = r_new;
        jac = jac_new;
        jtj = jac.transpose() * jac;
        grad = jac.transpose() * r;
        cost = cost_new;
        sol.cost_history.push_back(cost);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (moved <= options.step_tolerance * (p.norm() + options.step_tolerance) ||
            reduction <= 1e-15 * cost) {
          sol.converged = true;
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) {
          // No descent direction left at working precision.
          sol.converged = true;
          break;
        }
      }
    }
    if (sol.converged) {
      ++iter;
      break;
    }
  }
  sol.params = p;
  sol.jtj = jtj;
  sol.cost = cost;
  sol.iterations = iter;
  return sol;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::cosine: return "cosine";
    case ModelKind::harmonics_135: return "harmonics_135";
    case ModelKind::exponential: return "exponential";
    case ModelKind::double_exponential: return "double_exponential";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "cosine") return ModelKind::cosine;
  if (name == "harmonics_135" || name == "harmonics") return ModelKind::harmonics_135;
  if (name == "exponential") return ModelKind::exponential;
  if (name == "double_exponential") return ModelKind::double_exponential;
  throw std::invalid_argument("unknown fit model '" + std::string(name) + "'");
}

const FitParameter& FitResult::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("FitResult: no parameter '" + std::string(name) + "'");
}

bool FitResult::has(std::string_view name) const {
  return std::any_of(params.begin(), params.end(), [&](const auto& p) { return p.name == name; });
}

namespace {

void check_series(std::span<const double> tau, std::span<const double> values, std::size_t min_points,
                  const char* what) {
  if (tau.size() != values.size()) {
    throw std::invalid_argument(std::string(what) + ": tau and value counts differ");
  }
  if (tau.size() < min_points) {
    throw std::invalid_argument(std::string(what) + ": needs at least " + std::to_string(min_points) +
                                " points");
  }
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!std::isfinite(tau[i]) || !std::isfinite(values[i])) {
      throw std::invalid_argument(std::string(what) + ": non-finite data");
    }
  }
}

Eigen::VectorXd sqrt_weights(const FitOptions& options, std::size_t n) {
  if (options.weights.empty()) return Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  if (options.weights.size() != n) throw std::invalid_argument("fit: weight count mismatch");
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(options.weights[i] >= 0.0)) throw std::invalid_argument("fit: weights must be >= 0");
    w(static_cast<Eigen::Index>(i)) = std::sqrt(options.weights[i]);
  }
  return w;
}

// Linear least squares y ~ basis * coef (weighted); returns coef and RSS.
std::pair<Eigen::VectorXd, double> linear_fit(const Eigen::MatrixXd& basis, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& sw) {
  const Eigen::MatrixXd a = sw.asDiagonal() * basis;
  const Eigen::VectorXd b = sw.asDiagonal() * y;
  const Eigen::VectorXd coef = a.completeOrthogonalDecomposition().solve(b);
  return {coef, (a * coef - b).squaredNorm()};
}

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double frequency_bin(std::span<const double> tau) {
  const auto [lo, hi] = std::minmax_element(tau.begin(), tau.end());
  const double span = *hi - *lo;
  if (!(span > 0.0)) throw std::invalid_argument("fit: tau values span zero time");
  return 2.0 * kPi / span;
}

// Fills covariance/sigmas from the solver state.
void finish(FitResult& fit, const LeastSquaresSolution& sol, std::size_t n_points, bool weighted,
            const std::vector<std::string>& names) {
  const auto np = static_cast<std::size_t>(sol.params.size());
  const double dof = n_points > np ? static_cast<double>(n_points - np) : 0.0;
  const double scale = weighted ? 1.0 : (dof > 0.0 ? 2.0 * sol.cost / dof : 0.0);
  fit.covariance = scale * pseudo_inverse(sol.jtj);
  fit.residual_norm = std::sqrt(2.0 * sol.cost);
  fit.converged = sol.converged;
  fit.iterations = sol.iterations;
  fit.cost_history = sol.cost_history;
  fit.params.clear();
  for (std::size_t i = 0; i < np; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    fit.params.push_back({names[i], sol.params(ii), std::sqrt(std::max(0.0, fit.covariance(ii, ii)))});
  }
  if (!fit.converged) fit.warnings.push_back("did not converge; parameters are not authoritative");
}

}  // namespace

double seed_frequency(std::span<const double> tau, std::span<const double> values) {
  if (tau.size() != values.size()) throw std::invalid_argument("seed_frequency: size mismatch");
  if (tau.size() < 4) throw std::invalid_argument("seed_frequency: needs at least 4 points");
  const std::size_t n = tau.size();
  const Eigen::VectorXd t = to_vector(tau);
  const Eigen::VectorXd y = to_vector(values);

  Eigen::MatrixXd trend(static_cast<Eigen::Index>(n), 2);
  trend.col(0).setOnes();
  trend.col(1) = t.array() - t.mean();
  const Eigen::VectorXd coef = linear_fit(trend, y, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n))).first;
  const Eigen::VectorXd detrended = y - trend * coef;
  if (detrended.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + y.cwiseAbs().maxCoeff())) {
    throw std::domain_error("seed_frequency: signal carries no oscillation");
  }

  const double bin = frequency_bin(tau);
  const double span = 2.0 * kPi / bin;
  const double nyquist = kPi * static_cast<double>(n - 1) / span;
  const double step = bin / 8.0;
  double best_omega = step;
  double best_power = -1.0;
  for (double omega = step; omega <= nyquist + 0.5 * step; omega += step) {
    std::complex<double> acc{};
    for (std::size_t i = 0; i < n; ++i) {
      acc += detrended(static_cast<Eigen::Index>(i)) *
             std::exp(std::complex<double>(0.0, -omega * tau[i]));
    }
    const double power = std::norm(acc);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  return best_omega;
}

namespace {

// Harmonic basis [1, cos(k w t), sin(k w t)...] for the given orders.
Eigen::MatrixXd harmonic_basis(const Eigen::VectorXd& t, double omega, std::span<const int> orders) {
  Eigen::MatrixXd b(t.size(), 1 + 2 * static_cast<Eigen::Index>(orders.size()));
  b.col(0).setOnes();
  for (std::size_t j = 0; j < orders.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(1 + 2 * j);
    b.col(c) = (orders[j] * omega * t.array()).cos();
    b.col(c + 1) = (orders[j] * omega * t.array()).sin();
  }
  return b;
}

// Scans [center - half_width, center + half_width] for the lowest linear-fit RSS.
std::pair<double, double> refine_frequency(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& sw, double center, double half_width,
                                           std::span<const int> orders) {
  constexpr int kGrid = 81;
  double best = center;
  double best_rss = kInf;
  for (int i = 0; i < kGrid; ++i) {
    const double omega = center - half_width + 2.0 * half_width * i / (kGrid - 1);
    if (omega <= 0.0) continue;
    const double rss = linear_fit(harmonic_basis(t, omega, orders), y, sw).second;
    if (rss < best_rss) {
      best_rss = rss;
      best = omega;
    }
  }
  return {best, best_rss};
}

}  // namespace

FitResult fit_cosine(std::span<const double> tau, std::span<const double> values, const FitOptions& options) {
  check_series(tau, values, 5, "fit_cosine");
  const Eigen::VectorXd t = to_vector(tau);
  const Eigen::VectorXd y = to_vector(values);
  const Eigen::VectorXd sw = sqrt_weights(options, tau.size());

  double omega0 = 0.0;
  try {
    omega0 = seed_frequency(tau, values);
  } catch (const std::domain_error&) {
    throw FitError("fit_cosine: data carry no oscillation");
  }
  const double bin = frequency_bin(tau);
  constexpr int kOrders[] = {1};
  const double omega = refine_frequency(t, y, sw, omega0, bin, kOrders).first;
  const Eigen::VectorXd coef = linear_fit(harmonic_basis(t, omega, kOrders), y, sw).first;
  const double half = coef(0);
  const double amp = std::hypot(coef(1), coef(2));
  const double pb0 = std::clamp(2.0 * half, 1e-6, kContrastMax);
  const double c0 = std::clamp(half > 0.0 ? amp / half : 0.5, 0.0, kContrastMax);
  const double phi0 = std::atan2(-coef(2), coef(1));

  LeastSquaresProblem problem;
  problem.lower = Eigen::Vector4d(0.0, 0.0, 0.0, -kInf);
  problem.upper = Eigen::Vector4d(kContrastMax, kContrastMax, kInf, kInf);
  problem.evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const Eigen::ArrayXd arg = p(2) * t.array() + p(3);
    const Eigen::ArrayXd c = arg.cos();
    const Eigen::ArrayXd s = arg.sin();
    r = (sw.array() * (0.5 * p(0) * (1.0 + p(1) * c) - y.array())).matrix();
    jac.resize(t.size(), 4);
    jac.col(0) = (sw.array() * 0.5 * (1.0 + p(1) * c)).matrix();
    jac.col(1) = (sw.array() * 0.5 * p(0) * c).matrix();
    jac.col(2) = (sw.array() * -0.5 * p(0) * p(1) * s * t.array()).matrix();
    jac.col(3) = (sw.array() * -0.5 * p(0) * p(1) * s).matrix();
  };

  // Linear-seeded start plus 8 phase seeds.
  std::vector<Eigen::VectorXd> starts{Eigen::Vector4d(pb0, c0, omega, phi0)};
  for (int k = 0; k < 8; ++k) starts.emplace_back(Eigen::Vector4d(pb0, c0, omega, 2.0 * kPi * k / 8.0));
  LeastSquaresSolution best;
  best.cost = kInf;
  for (const auto& s : starts) {
    LeastSquaresSolution sol = levenberg_marquardt(problem, s, options.solver);
    if (sol.cost < best.cost) best = std::move(sol);
  }
  best.params(3) = wrap_phase(best.params(3));

  FitResult fit;
  fit.model = ModelKind::cosine;
  finish(fit, best, tau.size(), !options.weights.empty(), {"p_bar", "contrast", "omega", "phase"});
  return fit;
}

std::vector<double> branch_values(std::span<const FringeRecord> records, Branch branch) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(branch == Branch::plus ? r.p_plus : r.p_minus);
  return out;
}

std::vector<double> record_taus(std::span<const FringeRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.tau);
  return out;
}

FitResult fit_cosine(std::span<const FringeRecord> records, Branch branch, const FitOptions& options) {
  const auto t = record_taus(records);
  const auto y = branch_values(records, branch);
  return fit_cosine(t, y, options);
}

FitResult fit_harmonics(std::span<const double> tau, std::span<const double> values, Branch branch,
                        const FitOptions& options) {
  check_series(tau, values, 13, "fit_harmonics");
  const Eigen::VectorXd t = to_vector(tau);
  const Eigen::VectorXd y = to_vector(values);
  const Eigen::VectorXd sw = sqrt_weights(options, tau.size());
  const double sign = branch == Branch::plus ? 1.0 : -1.0;
  constexpr int kOrders[] = {1, 3, 5};

  double omega0 = 0.0;
  try {
    omega0 = seed_frequency(tau, values);
  } catch (const std::domain_error&) {
    throw FitError("fit_harmonics: data carry no oscillation");
  }
  const double bin = frequency_bin(tau);
  // The dominant tone is normally the fundamental; fall back to reading it
  // as the 3rd or 5th harmonic only if that fits clearly better.
  auto [omega, rss] = refine_frequency(t, y, sw, omega0, bin, kOrders);
  for (int k : {3, 5}) {
    const auto [w, r] = refine_frequency(t, y, sw, omega0 / k, bin / k, kOrders);
    if (r < 0.5 * rss) {
      omega = w;
      rss = r;
    }
  }
  const Eigen::VectorXd coef = linear_fit(harmonic_basis(t, omega, kOrders), y, sw).first;
  const double half = coef(0);
  Eigen::VectorXd start(8);
  start(0) = std::clamp(2.0 * half, 1e-6, kContrastMax);
  for (int j = 0; j < 3; ++j) {
    const double a = coef(1 + 2 * j);
    const double b = coef(2 + 2 * j);
    start(1 + j) = std::clamp(half > 0.0 ? std::hypot(a, b) / half : 0.1, 0.0, kContrastMax);
    start(4 + j) = std::atan2(-sign * b, sign * a);
  }
  start(7) = omega;

  LeastSquaresProblem problem;
  problem.lower = Eigen::VectorXd::Constant(8, -kInf);
  problem.upper = Eigen::VectorXd::Constant(8, kInf);
  for (int j = 0; j < 4; ++j) {
    problem.lower(j) = 0.0;
    problem.upper(j) = kContrastMax;
  }
  problem.lower(7) = 0.0;
  problem.evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double pb = p(0);
    Eigen::ArrayXd series = Eigen::ArrayXd::Zero(t.size());
    Eigen::ArrayXd d_omega = Eigen::ArrayXd::Zero(t.size());
    jac.resize(t.size(), 8);
    for (int j = 0; j < 3; ++j) {
      const double k = kOrders[j];
      const Eigen::ArrayXd arg = k * p(7) * t.array() + p(4 + j);
      const Eigen::ArrayXd c = arg.cos();
      const Eigen::ArrayXd s = arg.sin();
      series += p(1 + j) * c;
      jac.col(1 + j) = (sw.array() * sign * 0.5 * pb * c).matrix();
      jac.col(4 + j) = (sw.array() * -sign * 0.5 * pb * p(1 + j) * s).matrix();
      d_omega += -p(1 + j) * s * k * t.array();
    }
    r = (sw.array() * (0.5 * pb * (1.0 + sign * series) - y.array())).matrix();
    jac.col(0) = (sw.array() * 0.5 * (1.0 + sign * series)).matrix();
    jac.col(7) = (sw.array() * sign * 0.5 * pb * d_omega).matrix();
  };

  LeastSquaresSolution sol = levenberg_marquardt(problem, start, options.solver);
  for (int j = 0; j < 3; ++j) sol.params(4 + j) = wrap_phase(sol.params(4 + j));

  FitResult fit;
  fit.model = ModelKind::harmonics_135;
  finish(fit, sol, tau.size(), !options.weights.empty(),
         {"p_bar", "c1", "c3", "c5", "phi1", "phi3", "phi5", "omega"});
  for (int j = 0; j < 3; ++j) {
    if (sol.params(1 + j) < 1e-8) {
      fit.warnings.push_back("harmonic " + std::to_string(kOrders[j]) +
                             " amplitude ~ 0; its phase is undetermined");
    }
  }
  return fit;
}

FitResult fit_harmonics(std::span<const FringeRecord> records, Branch branch, const FitOptions& options) {
  const auto t = record_taus(records);
  const auto y = branch_values(records, branch);
  return fit_harmonics(t, y, branch, options);
}

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return g;
}

void append_time_constant(FitResult& fit, const std::string& suffix, Eigen::Index rate_index) {
  const double k = fit.covariance.size() ? fit.params[static_cast<std::size_t>(rate_index)].value : 0.0;
  const double sk = fit.params[static_cast<std::size_t>(rate_index)].sigma;
  if (k > 0.0) {
    fit.params.push_back({"time_constant" + suffix, 1.0 / k, sk / (k * k)});
  } else {
    fit.params.push_back({"time_constant" + suffix, kInf, kInf});
  }
}

}  // namespace

FitResult fit_decay(std::span<const double> tau, std::span<const double> values, ModelKind model,
                    const DecayOptions& options) {
  if (model != ModelKind::exponential && model != ModelKind::double_exponential) {
    throw std::invalid_argument("fit_decay: model must be exponential or double_exponential");
  }
  const bool single = model == ModelKind::exponential;
  check_series(tau, values, single ? 4 : 6, "fit_decay");
  const Eigen::VectorXd t = to_vector(tau);
  const Eigen::VectorXd y = to_vector(values);
  const Eigen::VectorXd sw = sqrt_weights(options.fit, tau.size());
  const bool free_offset = !options.fixed_offset.has_value();
  const double fixed_c = options.fixed_offset.value_or(0.0);
  const Eigen::Index n_exp = single ? 1 : 2;
  const Eigen::Index np = 2 * n_exp + (free_offset ? 1 : 0);

  FitResult fit;
  fit.model = model;

  const double scale = y.cwiseAbs().maxCoeff();
  const double spread = y.maxCoeff() - y.minCoeff();
  if (spread <= 1e-12 * std::max(scale, 1e-300) &&
      (free_offset || std::abs(y.mean() - fixed_c) <= 1e-12 * std::max(scale, 1e-300))) {
    fit.degenerate = true;
    fit.converged = false;
    fit.covariance = Eigen::MatrixXd::Zero(np, np);
    fit.warnings.push_back("constant series; decay rate is zero");
    const std::string sfx = single ? "" : "_slow";
    if (single) {
      fit.params = {{"amplitude", 0.0, 0.0}, {"rate", 0.0, 0.0}};
    } else {
      fit.params = {{"amplitude_fast", 0.0, 0.0}, {"rate_fast", 0.0, 0.0},
                    {"amplitude_slow", 0.0, 0.0}, {"rate_slow", 0.0, 0.0}};
    }
    if (free_offset) fit.params.push_back({"offset", y.mean(), 0.0});
    fit.params.push_back({"time_constant" + sfx, kInf, kInf});
    return fit;
  }

  // Variable projection seed: scan time constants, solve amplitudes linearly.
  std::vector<double> sorted(tau.begin(), tau.end());
  std::sort(sorted.begin(), sorted.end());
  double min_dt = kInf;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] > sorted[i - 1]) min_dt = std::min(min_dt, sorted[i] - sorted[i - 1]);
  }
  const double span = sorted.back() - sorted.front();
  if (!(span > 0.0)) throw std::invalid_argument("fit_decay: tau values span zero time");
  const std::vector<double> grid = log_grid(0.25 * min_dt, 100.0 * span, single ? 120 : 48);

  auto basis_for = [&](std::span<const double> rates) {
    Eigen::MatrixXd b(t.size(), static_cast<Eigen::Index>(rates.size()) + (free_offset ? 1 : 0));
    for (std::size_t j = 0; j < rates.size(); ++j) {
      b.col(static_cast<Eigen::Index>(j)) = (-rates[j] * t.array()).exp();
    }
    if (free_offset) b.col(b.cols() - 1).setOnes();
    return b;
  };
  const Eigen::VectorXd y_shift = (y.array() - (free_offset ? 0.0 : fixed_c)).matrix();

  Eigen::VectorXd start(np);
  double best_rss = kInf;
  if (single) {
    for (double T : grid) {
      const double rates[] = {1.0 / T};
      const auto [coef, rss] = linear_fit(basis_for(rates), y_shift, sw);
      if (rss < best_rss) {
        best_rss = rss;
        start(0) = coef(0);
        start(1) = rates[0];
        if (free_offset) start(2) = coef(1);
      }
    }
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      for (std::size_t j = i + 1; j < grid.size(); ++j) {
        const double rates[] = {1.0 / grid[i], 1.0 / grid[j]};
        const auto [coef, rss] = linear_fit(basis_for(rates), y_shift, sw);
        if (rss < best_rss) {
          best_rss = rss;
          start(0) = coef(0);
          start(1) = rates[0];
          start(2) = coef(1);
          start(3) = rates[1];
          if (free_offset) start(4) = coef(2);
        }
      }
    }
  }

  LeastSquaresProblem problem;
  problem.lower = Eigen::VectorXd::Constant(np, -kInf);
  problem.upper = Eigen::VectorXd::Constant(np, kInf);
  for (Eigen::Index e = 0; e < n_exp; ++e) problem.lower(2 * e + 1) = 0.0;
  problem.evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    Eigen::ArrayXd model_y = Eigen::ArrayXd::Constant(t.size(), free_offset ? p(np - 1) : fixed_c);
    jac.resize(t.size(), np);
    for (Eigen::Index e = 0; e < n_exp; ++e) {
      const Eigen::ArrayXd ex = (-p(2 * e + 1) * t.array()).exp();
      model_y += p(2 * e) * ex;
      jac.col(2 * e) = (sw.array() * ex).matrix();
      jac.col(2 * e + 1) = (sw.array() * -p(2 * e) * t.array() * ex).matrix();
    }
    if (free_offset) jac.col(np - 1) = sw;
    r = (sw.array() * (model_y - y.array())).matrix();
  };
  LeastSquaresSolution sol = levenberg_marquardt(problem, start, options.fit.solver);

  std::vector<std::string> names;
  if (single) {
    names = {"amplitude", "rate"};
  } else {
    // Order the components fast then slow.
    if (sol.params(1) < sol.params(3)) {
      std::swap(sol.params(0), sol.params(2));
      std::swap(sol.params(1), sol.params(3));
      Eigen::PermutationMatrix<Eigen::Dynamic> perm(np);
      perm.setIdentity();
      perm.indices()(0) = 2;
      perm.indices()(1) = 3;
      perm.indices()(2) = 0;
      perm.indices()(3) = 1;
      sol.jtj = perm * sol.jtj * perm.transpose();
    }
    names = {"amplitude_fast", "rate_fast", "amplitude_slow", "rate_slow"};
  }
  if (free_offset) names.push_back("offset");
  finish(fit, sol, tau.size(), !options.fit.weights.empty(), names);
  if (single) {
    append_time_constant(fit, "", 1);
  } else {
    append_time_constant(fit, "_fast", 1);
    append_time_constant(fit, "_slow", 3);
  }
  for (Eigen::Index e = 0; e < n_exp; ++e) {
    if (std::abs(sol.params(2 * e)) <= 1e-9 * std::max(scale, 1e-300)) {
      fit.degenerate = true;
      fit.warnings.push_back("decay amplitude ~ 0; time constant is undetermined");
    }
  }
  return fit;
}

double evaluate_fringe(const FitResult& fit, double tau, Branch branch) {
  switch (fit.model) {
    case ModelKind::cosine:
      return 0.5 * fit.value("p_bar") *
             (1.0 + fit.value("contrast") * std::cos(fit.value("omega") * tau + fit.value("phase")));
    case ModelKind::harmonics_135: {
      const double sign = branch == Branch::plus ? 1.0 : -1.0;
      const double w = fit.value("omega");
      const double s = fit.value("c1") * std::cos(w * tau + fit.value("phi1")) +
                       fit.value("c3") * std::cos(3.0 * w * tau + fit.value("phi3")) +
                       fit.value("c5") * std::cos(5.0 * w * tau + fit.value("phi5"));
      return 0.5 * fit.value("p_bar") * (1.0 + sign * s);
    }
    default:
      throw std::invalid_argument("evaluate_fringe: not a fringe model");
  }
}

FitResult average_branches(const FitResult& plus, const FitResult& minus) {
  if (plus.model != minus.model) throw std::invalid_argument("average_branches: model mismatch");
  FitResult out;
  out.model = plus.model;
  out.converged = plus.converged && minus.converged;
  out.degenerate = plus.degenerate || minus.degenerate;
  out.iterations = std::max(plus.iterations, minus.iterations);
  out.residual_norm = std::hypot(plus.residual_norm, minus.residual_norm);
  for (const auto& p : plus.params) {
    if (p.name.rfind("ph", 0) == 0 || !minus.has(p.name)) continue;  // phase, phi1, ...
    const FitParameter& q = minus.param(p.name);
    out.params.push_back({p.name, 0.5 * (p.value + q.value), 0.5 * std::hypot(p.sigma, q.sigma)});
  }
  if (!out.converged) out.warnings.push_back("at least one branch fit did not converge");
  return out;
}

}  // namespace spincat
