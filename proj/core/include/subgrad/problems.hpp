#pragma once

// Built-in problem families: regularized hinge-loss SVM, stochastic LASSO
// (sparse LMS) and anisotropic total-variation denoising.

#include <algorithm>
#include <cstddef>
#include <span>

#include "subgrad/engine.hpp"
#include "subgrad/image.hpp"
#include "subgrad/types.hpp"

namespace subgrad {

/// Componentwise sign with sgn(0) = 0.
Vector sign(const Vector& x);

// ---------------------------------------------------------------------------
// SVM: J(w) = rho/2 |w|^2 + E max{0, 1 - gamma h'w}

class SvmProblem {
 public:
  SvmProblem(double rho, std::size_t dimension);

  double rho() const noexcept { return rho_; }
  std::size_t dimension() const noexcept { return dim_; }

  Vector instantaneous_subgradient(const Iterate& w, const Sample& s) const;

 private:
  double rho_;
  std::size_t dim_;
};

/// rho*w - gamma*h*I[gamma h'w <= 1]. The margin-one tie counts as active.
/// Throws InvalidArgument for labels other than +1/-1.
Vector svm_instantaneous_subgradient(const SvmProblem& p, const Iterate& w, const Sample& s);

/// (rho/2)|w|^2 + max{0, 1 - gamma h'w}.
double hinge_loss(const Iterate& w, const Sample& s, double rho);

/// Exact subgradient of the empirical risk over a fixed sample set; the
/// average of svm_instantaneous_subgradient over `samples`.
Vector svm_empirical_subgradient(const SvmProblem& p, const Iterate& w, std::span<const Sample> samples);

/// (rho/2)|w|^2 + mean hinge over `samples`.
double svm_empirical_risk(const SvmProblem& p, const Iterate& w, std::span<const Sample> samples);

/// Empirical SVM risk over a frozen sample set, evaluated column-wise. Used
/// as the exact risk when samples are drawn uniformly from the set.
class SvmEmpiricalRisk {
 public:
  SvmEmpiricalRisk(double rho, std::span<const Sample> samples);

  double rho() const noexcept { return rho_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(Y_.cols()); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(Y_.rows()); }
  /// Mean of |h|^2 over the set: Tr of the empirical second moment.
  double trace_second_moment() const noexcept { return trace_; }

  double risk(const Iterate& w) const;
  Vector subgradient(const Iterate& w) const;
  /// Risk and subgradient from one pass over the margins.
  double risk_and_subgradient(const Iterate& w, Vector& g) const;

 private:
  double evaluate(const Iterate& w, Vector* g) const;

  double rho_;
  Matrix Y_;  // row k is gamma_k h_k'
  double trace_ = 0.0;
};

struct SvmOracleResult {
  Iterate w_star;
  double risk_star = 0.0;
};

/// Deterministic subgradient descent on the empirical risk with steps
/// 1/(rho (k+1)); returns the lowest-risk point among the iterates and their
/// k-weighted running average.
SvmOracleResult svm_empirical_minimizer(const SvmEmpiricalRisk& emp, std::size_t iterations);

/// Monte-Carlo estimate of the true subgradient from N fresh samples.
template <SampleStream S>
Vector svm_true_subgradient_mc(const SvmProblem& p, const Iterate& w, S& sampler, std::size_t n) {
  if (n == 0) throw InvalidArgument("Monte-Carlo size must be positive");
  Vector acc = Vector::Zero(w.size());
  for (std::size_t k = 0; k < n; ++k) {
    auto s = sampler.next();
    if (!s) throw StreamExhausted("sampler exhausted during subgradient estimate");
    acc += svm_instantaneous_subgradient(p, w, *s);
  }
  return acc / static_cast<double>(n);
}

/// Monte-Carlo estimate of the SVM risk from N fresh samples.
template <SampleStream S>
double svm_risk_mc(const SvmProblem& p, const Iterate& w, S& sampler, std::size_t n) {
  if (n == 0) throw InvalidArgument("Monte-Carlo size must be positive");
  double hinge = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    auto s = sampler.next();
    if (!s) throw StreamExhausted("sampler exhausted during risk estimate");
    hinge += std::max(0.0, 1.0 - s->gamma * s->h.dot(w));
  }
  return 0.5 * p.rho() * w.squaredNorm() + hinge / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// LASSO: J(w) = 1/2 E(gamma - h'w)^2 + delta |w|_1 under gamma = h'w_true + n

class LassoProblem {
 public:
  /// Throws InvalidArgument unless delta >= 0, sigma_n2 >= 0 and R_h is
  /// symmetric positive definite with the dimension of w_true.
  LassoProblem(double delta, Vector w_true, Matrix R_h, double sigma_n2);

  double delta() const noexcept { return delta_; }
  const Vector& w_true() const noexcept { return w_true_; }
  const Matrix& R_h() const noexcept { return R_h_; }
  double sigma_n2() const noexcept { return sigma_n2_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(w_true_.size()); }

  /// Smallest and largest eigenvalue of R_h; the latter is its spectral norm.
  double min_eigenvalue() const noexcept { return lambda_min_; }
  double max_eigenvalue() const noexcept { return lambda_max_; }
  bool covariance_is_identity() const noexcept { return identity_; }

  Vector instantaneous_subgradient(const Iterate& w, const Sample& s) const;

 private:
  double delta_;
  Vector w_true_;
  Matrix R_h_;
  double sigma_n2_;
  double lambda_min_ = 0.0;
  double lambda_max_ = 0.0;
  bool identity_ = false;
};

/// -h (gamma - h'w) + delta sgn(w).
Vector lasso_instantaneous_subgradient(const LassoProblem& p, const Iterate& w, const Sample& s);

/// -R_h (w_true - w) + delta sgn(w).
Vector lasso_true_subgradient(const LassoProblem& p, const Iterate& w);

/// 1/2 (w - w_true)' R_h (w - w_true) + sigma_n2/2 + delta |w|_1.
double lasso_risk_closed_form(const LassoProblem& p, const Iterate& w);

/// sgn(x) max{0, |x| - delta}, componentwise.
Vector soft_threshold(const Vector& x, double delta);

/// Minimizer soft_threshold(w_true, delta). Only exact for R_h = I; other
/// covariances throw UnsupportedConfiguration.
Iterate lasso_optimum(const LassoProblem& p);

/// Closed-form risk oracle for a LASSO problem with identity covariance.
RiskOracle lasso_risk_oracle(const LassoProblem& p);

// ---------------------------------------------------------------------------
// Total-variation denoising: 1/2 |I - I_noisy|_F^2 + lambda TV(I)

/// Anisotropic TV: sum of |horizontal| and |vertical| neighbor differences.
/// Differences that would reach outside the image are dropped.
double tv_value(const GrayImage& img);

/// 1/2 |img - noisy|_F^2 + lambda TV(img).
double tv_objective(const GrayImage& img, const GrayImage& noisy, double lambda);

/// One step img - mu (img - noisy + lambda sum_j sgn(img - shift_j img)) over
/// the four one-pixel shifts; a neighbor term is used only where the shifted
/// pixel exists, matching tv_value. Output is not clipped.
GrayImage tv_subgradient_step(const GrayImage& img, const GrayImage& noisy, double mu, double lambda);

struct TvDenoiseResult {
  GrayImage smoothed;  // kappa-weighted average of the iterates
  GrayImage last;      // raw iterate after the final step
};

/// Runs `iterations` steps of tv_subgradient_step starting from `noisy`,
/// smoothing the image iterates with factor kappa in [0, 1).
TvDenoiseResult tv_denoise(const GrayImage& noisy, double lambda, double mu, std::size_t iterations, double kappa);

}  // namespace subgrad
