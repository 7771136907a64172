#pragma once

// Constants, rates and performance bounds for constant step-size stochastic
// subgradient learning, plus Monte-Carlo checks of the modelling assumptions.
//
// Notation:
//   eta      strong-convexity constant of the risk
//   c, d     affine-Lipschitz constants: |g(w1) - g'(w2)| <= c|w1 - w2| + d
//   e2, f2   squared form: e2 = 2c^2, f2 = 2d^2
//   beta2, sigma2   gradient-noise moments: E|s|^2 <= beta2 |w* - w|^2 + sigma2
//   tau2     f2 + sigma2

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "subgrad/engine.hpp"
#include "subgrad/problems.hpp"
#include "subgrad/random.hpp"
#include "subgrad/types.hpp"

namespace subgrad {

struct ProblemConstants {
  double eta = 0.0;
  double c = 0.0;
  double d = 0.0;
  double e2 = 0.0;
  double f2 = 0.0;
  double beta2 = 0.0;
  double sigma2 = 0.0;
  double tau2 = 0.0;

  /// Derives e2, f2 and tau2 from the primary constants.
  static ProblemConstants from(double eta, double c, double d, double beta2, double sigma2);
};

/// alpha = 1 - mu*eta + mu^2 (e2 + beta2).
double rate_alpha(double mu, const ProblemConstants& k);

/// eta / (e2 + beta2); +infinity when e2 + beta2 == 0.
double step_size_ceiling(const ProblemConstants& k);

struct SteadyStateBounds {
  double excess_risk = 0.0;  // mu (f2 + sigma2) / 2
  double msd = 0.0;          // mu (f2 + sigma2) / eta
};

SteadyStateBounds steady_state_bounds(double mu, const ProblemConstants& k);

/// Excess-risk bound for the smoothed iterate after L steps:
///   alpha^L (1 - alpha) / (2 mu (1 - alpha^L)) * msd0 + mu (f2 + sigma2) / 2.
/// Throws InvalidConfiguration when alpha >= 1 and InvalidArgument for L = 0.
double finite_horizon_bound(double mu, const ProblemConstants& k, std::size_t L, double msd0);

/// eta = c = rho, d = 2 sqrt(Tr R_h), beta2 = 0, sigma2 = Tr R_h.
ProblemConstants svm_constants(double rho, double trace_Rh);

/// eta = lambda_min(R_h), c = |R_h|, d = 2 delta sqrt(M), beta2 = 2a,
/// sigma2 = sigma_n2 Tr(R_h) + 2a |w_true - w*|^2. Uses the closed-form
/// optimum, so R_h must be the identity.
ProblemConstants lasso_constants(const LassoProblem& p, double a_estimate);

struct Estimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Spectral norm of R - h h' for symmetric R.
double spectral_norm_rank_one_update(const Matrix& R, const Vector& h);

/// Monte-Carlo estimate of a = 2 E |R_h - h h'|^2 (spectral norm) with
/// h ~ N(0, R_h), over n draws.
Estimate estimate_lasso_a(const LassoProblem& p, std::size_t n, Rng& rng);

struct SvmTightBound {
  double bound = 0.0;  // mu (rho^2 |w*|^2 + rho + Tr(R_h)/2)
  double alpha = 0.0;  // 1 - 2 mu rho + 2 mu^2 rho^2
};

SvmTightBound svm_tight_bound(double mu, double rho, double w_star_norm2, double trace_Rh);

/// Summary of rate and steady-state quantities for a (mu, constants) pair.
struct RateReport {
  double alpha = 0.0;
  double mu_max = 0.0;
  double steady_state_excess_risk = 0.0;
  double msd_bound = 0.0;
  std::optional<double> fitted_alpha;
};

RateReport make_rate_report(double mu, const ProblemConstants& k);

/// Machine-readable "key = value" records, one per line, keys sorted.
std::string format_key_values(const std::map<std::string, double>& records);
std::map<std::string, double> to_key_values(const ProblemConstants& k);
std::map<std::string, double> to_key_values(const RateReport& r);

// ---------------------------------------------------------------------------
// Assumption checks

using SubgradientFn = std::function<Vector(const Iterate&)>;
using InstantaneousFn = std::function<Vector(const Iterate&, const Sample&)>;
using RiskFn = std::function<double(const Iterate&)>;
using SampleSource = std::function<Sample()>;

struct NoiseMomentReport {
  std::size_t samples = 0;
  Vector mean;         // componentwise mean of s = g_hat - g
  Vector mean_stderr;  // standard error of each component
  double second_moment = 0.0;         // mean of |s|^2
  double second_moment_stderr = 0.0;
  double bound = 0.0;                 // beta2 |w* - w|^2 + sigma2
  /// Largest |mean_j| / stderr_j (0 when every component is exactly 0).
  double max_mean_z = 0.0;
};

/// Estimates E s and E|s|^2 at fixed w over n draws from `draw`.
NoiseMomentReport verify_noise_moments(const InstantaneousFn& instantaneous, const SubgradientFn& truth,
                                       const SampleSource& draw, const Iterate& w, const Iterate& w_star,
                                       double beta2, double sigma2, std::size_t n);

/// Two-sided z threshold that keeps the family-wise false-alarm rate of
/// `tests` simultaneous checks equal to that of one three-sigma check.
double familywise_z_threshold(std::size_t tests);

/// Counts pairs with |g(w1) - g(w2)| > c|w1 - w2| + d beyond a 1e-9 relative
/// slack. Pairs are independent N(0, scale^2 I) vectors.
std::size_t verify_affine_lipschitz(const SubgradientFn& g, std::size_t dimension, std::size_t pairs,
                                    double c, double d, double scale, Rng& rng);

/// Counts pairs violating J(w) >= J(w0) + g(w0)'(w - w0) by more than
/// 1e-9 (1 + |J(w)|).
std::size_t verify_subgradient_inequality(const RiskFn& risk, const SubgradientFn& g, std::size_t dimension,
                                          std::size_t pairs, double scale, Rng& rng);

/// Counts points with |g(w)| < eta |w - w*| beyond a 1e-9 relative slack,
/// at w = w* + N(0, scale^2 I).
std::size_t verify_strong_monotonicity(const SubgradientFn& g, const Iterate& w_star, double eta,
                                       std::size_t points, double scale, Rng& rng);

// ---------------------------------------------------------------------------
// Rate fitting

/// Per-iteration geometric factor fitted by least squares to
/// log(value - floor) over the transient: the leading run of points above
/// 2*floor, minus its first 5% of iterations. Throws InsufficientData with
/// fewer than 10 usable points.
double fit_rate(std::span<const std::size_t> iterations, std::span<const double> values, double floor);

/// fit_rate on the smoothed excess-risk curve.
double fit_rate(const Trajectory& curve, double floor);

/// First recorded iteration at which value <= threshold, if any.
std::optional<std::size_t> first_crossing(std::span<const std::size_t> iterations,
                                          std::span<const double> values, double threshold);

}  // namespace subgrad
