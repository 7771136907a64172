#include "subgrad/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "subgrad/error.hpp"

namespace subgrad {

ProblemConstants ProblemConstants::from(double eta, double c, double d, double beta2, double sigma2) {
  ProblemConstants k;
  k.eta = eta;
  k.c = c;
  k.d = d;
  k.e2 = 2.0 * c * c;
  k.f2 = 2.0 * d * d;
  k.beta2 = beta2;
  k.sigma2 = sigma2;
  k.tau2 = k.f2 + sigma2;
  return k;
}

double rate_alpha(double mu, const ProblemConstants& k) {
  if (!(mu >= 0.0)) throw InvalidArgument("step size mu must be nonnegative");
  return 1.0 - mu * k.eta + mu * mu * (k.e2 + k.beta2);
}

double step_size_ceiling(const ProblemConstants& k) {
  const double denom = k.e2 + k.beta2;
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return k.eta / denom;
}

SteadyStateBounds steady_state_bounds(double mu, const ProblemConstants& k) {
  if (!(mu > 0.0)) throw InvalidArgument("step size mu must be positive");
  if (!(k.eta > 0.0)) throw InvalidArgument("strong-convexity constant eta must be positive");
  return {mu * k.tau2 / 2.0, mu * k.tau2 / k.eta};
}

double finite_horizon_bound(double mu, const ProblemConstants& k, std::size_t L, double msd0) {
  if (L == 0) throw InvalidArgument("finite-horizon bound needs L >= 1");
  if (!(msd0 >= 0.0)) throw InvalidArgument("initial MSD must be nonnegative");
  const double alpha = rate_alpha(mu, k);
  if (!(alpha < 1.0)) {
    std::ostringstream os;
    os << "rate alpha = " << alpha << " >= 1: mu = " << mu << " is above eta/(e^2+beta^2) = " << step_size_ceiling(k);
    throw InvalidConfiguration(os.str());
  }
  const double steady = mu * k.tau2 / 2.0;
  if (msd0 == 0.0) return steady;
  const double aL = std::pow(alpha, static_cast<double>(L));
  // (1 - alpha) / (1 - alpha^L) computed without cancellation for alpha near 1.
  const double ratio = -std::expm1(std::log(alpha)) / -std::expm1(static_cast<double>(L) * std::log(alpha));
  return aL * ratio / (2.0 * mu) * msd0 + steady;
}

ProblemConstants svm_constants(double rho, double trace_Rh) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (!(trace_Rh >= 0.0)) throw InvalidArgument("Tr(R_h) must be nonnegative");
  return ProblemConstants::from(rho, rho, 2.0 * std::sqrt(trace_Rh), 0.0, trace_Rh);
}

ProblemConstants lasso_constants(const LassoProblem& p, double a_estimate) {
  if (!(a_estimate >= 0.0)) throw InvalidArgument("a estimate must be nonnegative");
  const Iterate w_star = lasso_optimum(p);
  const double M = static_cast<double>(p.dimension());
  const double sigma2 = p.sigma_n2() * p.R_h().trace() + 2.0 * a_estimate * (p.w_true() - w_star).squaredNorm();
  return ProblemConstants::from(p.min_eigenvalue(), p.max_eigenvalue(), 2.0 * p.delta() * std::sqrt(M),
                                2.0 * a_estimate, sigma2);
}

double spectral_norm_rank_one_update(const Matrix& R, const Vector& h) {
  if (R.rows() != h.size() || R.cols() != h.size()) throw InvalidArgument("dimension mismatch");
  Matrix A = R;
  A.noalias() -= h * h.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(A, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Estimate estimate_lasso_a(const LassoProblem& p, std::size_t n, Rng& rng) {
  if (n == 0) throw InvalidArgument("Monte-Carlo size must be positive");
  const Matrix& R = p.R_h();
  const auto M = R.rows();
  const double c0 = R(0, 0);
  const bool scaled_identity = (R - c0 * Matrix::Identity(M, M)).cwiseAbs().maxCoeff() == 0.0;

  // For R = cI the eigenvalues of cI - hh' are c (M-1 times) and c - |h|^2.
  Matrix factor;
  if (!scaled_identity) {
    Eigen::LLT<Matrix> llt(R);
    if (llt.info() != Eigen::Success) throw NumericError("R_h Cholesky factorization failed");
    factor = llt.matrixL();
  }

  Vector z(M);
  Vector h(M);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    rng.fill_normal(z);
    double norm;
    if (scaled_identity) {
      h = std::sqrt(c0) * z;
      const double lowest = std::abs(c0 - h.squaredNorm());
      norm = M > 1 ? std::max(std::abs(c0), lowest) : lowest;
    } else {
      h.noalias() = factor * z;
      norm = spectral_norm_rank_one_update(R, h);
    }
    const double x = 2.0 * norm * norm;
    sum += x;
    sum2 += x * x;
  }
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  const double var = n > 1 ? std::max(0.0, (sum2 - nd * mean * mean) / (nd - 1.0)) : 0.0;
  return {mean, std::sqrt(var / nd)};
}

SvmTightBound svm_tight_bound(double mu, double rho, double w_star_norm2, double trace_Rh) {
  if (!(mu > 0.0) || !(rho > 0.0)) throw InvalidArgument("mu and rho must be positive");
  SvmTightBound out;
  out.bound = mu * (rho * rho * w_star_norm2 + rho + trace_Rh / 2.0);
  out.alpha = 1.0 - 2.0 * mu * rho + 2.0 * mu * mu * rho * rho;
  return out;
}

RateReport make_rate_report(double mu, const ProblemConstants& k) {
  RateReport r;
  r.alpha = rate_alpha(mu, k);
  r.mu_max = step_size_ceiling(k);
  const auto ss = steady_state_bounds(mu, k);
  r.steady_state_excess_risk = ss.excess_risk;
  r.msd_bound = ss.msd;
  return r;
}

std::string format_key_values(const std::map<std::string, double>& records) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& [key, value] : records) os << key << " = " << value << '\n';
  return os.str();
}

std::map<std::string, double> to_key_values(const ProblemConstants& k) {
  return {{"eta", k.eta}, {"c", k.c},           {"d", k.d},          {"e2", k.e2},
          {"f2", k.f2},   {"beta2", k.beta2}, {"sigma2", k.sigma2}, {"tau2", k.tau2}};
}

std::map<std::string, double> to_key_values(const RateReport& r) {
  std::map<std::string, double> out{{"alpha", r.alpha},
                                    {"mu_max", r.mu_max},
                                    {"steady_state_excess_risk", r.steady_state_excess_risk},
                                    {"msd_bound", r.msd_bound}};
  if (r.fitted_alpha) out["fitted_alpha"] = *r.fitted_alpha;
  return out;
}

// --- assumption checks -------------------------------------------------------

NoiseMomentReport verify_noise_moments(const InstantaneousFn& instantaneous, const SubgradientFn& truth,
                                       const SampleSource& draw, const Iterate& w, const Iterate& w_star,
                                       double beta2, double sigma2, std::size_t n) {
  if (n < 2) throw InvalidArgument("noise moment check needs at least 2 samples");
  const Vector g = truth(w);
  const auto M = g.size();
  Vector sum = Vector::Zero(M), sum2 = Vector::Zero(M);
  double q = 0.0, q2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector s = instantaneous(w, draw()) - g;
    sum += s;
    sum2 += s.cwiseAbs2();
    const double sq = s.squaredNorm();
    q += sq;
    q2 += sq * sq;
  }
  const double nd = static_cast<double>(n);
  NoiseMomentReport r;
  r.samples = n;
  r.mean = sum / nd;
  const Vector var = ((sum2 - nd * r.mean.cwiseAbs2()) / (nd - 1.0)).cwiseMax(0.0);
  r.mean_stderr = (var / nd).cwiseSqrt();
  r.second_moment = q / nd;
  r.second_moment_stderr = std::sqrt(std::max(0.0, (q2 - nd * r.second_moment * r.second_moment) / (nd - 1.0)) / nd);
  r.bound = beta2 * (w_star - w).squaredNorm() + sigma2;
  for (Eigen::Index j = 0; j < M; ++j) {
    if (r.mean[j] == 0.0) continue;
    const double z = r.mean_stderr[j] > 0.0 ? std::abs(r.mean[j]) / r.mean_stderr[j]
                                             : std::numeric_limits<double>::infinity();
    r.max_mean_z = std::max(r.max_mean_z, z);
  }
  return r;
}

double familywise_z_threshold(std::size_t tests) {
  if (tests == 0) throw InvalidArgument("need at least one test");
  // Two-sided tail of a single 3-sigma check, split evenly across tests.
  const double family = std::erfc(3.0 / std::sqrt(2.0));
  const double per_test = family / static_cast<double>(tests);
  double lo = 0.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid / std::sqrt(2.0)) > per_test) lo = mid;
    else hi = mid;
  }
  return std::max(3.0, hi);
}

namespace {

Vector gaussian(std::size_t dim, double scale, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(dim));
  rng.fill_normal(v);
  return scale * v;
}

}  // namespace

std::size_t verify_affine_lipschitz(const SubgradientFn& g, std::size_t dimension, std::size_t pairs, double c,
                                    double d, double scale, Rng& rng) {
  std::size_t violations = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vector w1 = gaussian(dimension, scale, rng);
    const Vector w2 = gaussian(dimension, scale, rng);
    const double lhs = (g(w1) - g(w2)).norm();
    const double rhs = c * (w1 - w2).norm() + d;
    if (lhs > rhs + 1e-9 * std::max(1.0, rhs)) ++violations;
  }
  return violations;
}

std::size_t verify_subgradient_inequality(const RiskFn& risk, const SubgradientFn& g, std::size_t dimension,
                                          std::size_t pairs, double scale, Rng& rng) {
  std::size_t violations = 0;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vector w0 = gaussian(dimension, scale, rng);
    const Vector w = gaussian(dimension, scale, rng);
    const double lhs = risk(w);
    const double rhs = risk(w0) + g(w0).dot(w - w0);
    if (rhs - lhs > 1e-9 * (1.0 + std::abs(lhs))) ++violations;
  }
  return violations;
}

std::size_t verify_strong_monotonicity(const SubgradientFn& g, const Iterate& w_star, double eta,
                                       std::size_t points, double scale, Rng& rng) {
  std::size_t violations = 0;
  for (std::size_t k = 0; k < points; ++k) {
    const Vector w = w_star + gaussian(static_cast<std::size_t>(w_star.size()), scale, rng);
    const double lhs = g(w).norm();
    const double rhs = eta * (w - w_star).norm();
    if (rhs - lhs > 1e-9 * std::max(1.0, rhs)) ++violations;
  }
  return violations;
}

// --- rate fitting ------------------------------------------------------------

double fit_rate(std::span<const std::size_t> iterations, std::span<const double> values, double floor) {
  if (iterations.size() != values.size()) throw InvalidArgument("fit_rate: length mismatch");
  if (!(floor >= 0.0)) throw InvalidArgument("fit_rate: floor must be nonnegative");

  std::size_t end = 0;
  while (end < values.size() && values[end] > 2.0 * floor) ++end;
  if (end < 10) throw InsufficientData("fit_rate: fewer than 10 transient points above twice the floor");

  const double first = static_cast<double>(iterations[0]);
  const double burn_in = first + 0.05 * (static_cast<double>(iterations[end - 1]) - first);

  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < end; ++k) {
    const double x = static_cast<double>(iterations[k]);
    if (x < burn_in) continue;
    const double y = std::log(values[k] - floor);
    n += 1.0;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  if (n < 10.0) throw InsufficientData("fit_rate: fewer than 10 transient points after burn-in");
  const double mx = sx / n;
  const double slope = (sxy - n * mx * (sy / n)) / (sxx - n * mx * mx);
  return std::exp(slope);
}

double fit_rate(const Trajectory& curve, double floor) {
  if (!curve.has_risk()) throw InvalidArgument("fit_rate: trajectory has no risk curve");
  return fit_rate(curve.iterations, curve.smoothed_excess_risk, floor);
}

std::optional<std::size_t> first_crossing(std::span<const std::size_t> iterations, std::span<const double> values,
                                          double threshold) {
  if (iterations.size() != values.size()) throw InvalidArgument("first_crossing: length mismatch");
  for (std::size_t k = 0; k < values.size(); ++k)
    if (values[k] <= threshold) return iterations[k];
  return std::nullopt;
}

}  // namespace subgrad
