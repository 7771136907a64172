#include "subgrad/problems.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "subgrad/error.hpp"

namespace subgrad {

namespace {

void require_dim(Eigen::Index got, std::size_t want, const char* what) {
  if (static_cast<std::size_t>(got) != want) {
    throw InvalidArgument(std::string(what) + " has dimension " + std::to_string(got) + ", expected " +
                          std::to_string(want));
  }
}

double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace

Vector sign(const Vector& x) { return x.unaryExpr([](double v) { return sgn(v); }); }

// --- SVM ---------------------------------------------------------------------

SvmProblem::SvmProblem(double rho, std::size_t dimension) : rho_(rho), dim_(dimension) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("SVM regularization rho must be positive");
}

Vector SvmProblem::instantaneous_subgradient(const Iterate& w, const Sample& s) const {
  return svm_instantaneous_subgradient(*this, w, s);
}

Vector svm_instantaneous_subgradient(const SvmProblem& p, const Iterate& w, const Sample& s) {
  require_dim(w.size(), p.dimension(), "iterate");
  require_dim(s.h.size(), p.dimension(), "feature vector");
  if (s.gamma != 1.0 && s.gamma != -1.0) {
    throw InvalidArgument("SVM label must be +1 or -1, got " + std::to_string(s.gamma));
  }
  Vector g = p.rho() * w;
  if (s.gamma * s.h.dot(w) <= 1.0) g.noalias() -= s.gamma * s.h;
  return g;
}

double hinge_loss(const Iterate& w, const Sample& s, double rho) {
  if (w.size() != s.h.size()) throw InvalidArgument("hinge_loss: dimension mismatch");
  return 0.5 * rho * w.squaredNorm() + std::max(0.0, 1.0 - s.gamma * s.h.dot(w));
}

Vector svm_empirical_subgradient(const SvmProblem& p, const Iterate& w, std::span<const Sample> samples) {
  if (samples.empty()) throw InvalidArgument("empirical subgradient over an empty sample set");
  require_dim(w.size(), p.dimension(), "iterate");
  Vector active = Vector::Zero(w.size());
  for (const auto& s : samples) {
    if (s.gamma * s.h.dot(w) <= 1.0) active.noalias() += s.gamma * s.h;
  }
  return p.rho() * w - active / static_cast<double>(samples.size());
}

double svm_empirical_risk(const SvmProblem& p, const Iterate& w, std::span<const Sample> samples) {
  if (samples.empty()) throw InvalidArgument("empirical risk over an empty sample set");
  require_dim(w.size(), p.dimension(), "iterate");
  double hinge = 0.0;
  for (const auto& s : samples) hinge += std::max(0.0, 1.0 - s.gamma * s.h.dot(w));
  return 0.5 * p.rho() * w.squaredNorm() + hinge / static_cast<double>(samples.size());
}

SvmEmpiricalRisk::SvmEmpiricalRisk(double rho, std::span<const Sample> samples) : rho_(rho) {
  if (!(rho > 0.0)) throw InvalidArgument("SVM regularization rho must be positive");
  if (samples.empty()) throw InvalidArgument("empirical risk over an empty sample set");
  const auto M = samples.front().h.size();
  Y_.resize(static_cast<Eigen::Index>(samples.size()), M);
  double tr = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    require_dim(s.h.size(), static_cast<std::size_t>(M), "feature vector");
    if (s.gamma != 1.0 && s.gamma != -1.0) throw InvalidArgument("SVM label must be +1 or -1");
    Y_.row(static_cast<Eigen::Index>(k)) = s.gamma * s.h.transpose();
    tr += s.h.squaredNorm();
  }
  trace_ = tr / static_cast<double>(samples.size());
}

double SvmEmpiricalRisk::evaluate(const Iterate& w, Vector* g) const {
  require_dim(w.size(), dimension(), "iterate");
  // Blocks of rows keep the margins on the stack and in cache.
  constexpr Eigen::Index kBlock = 256;
  Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kBlock, 1> margins;
  Vector active_sum = Vector::Zero(w.size());
  double hinge = 0.0;
  const Eigen::Index N = Y_.rows();
  for (Eigen::Index start = 0; start < N; start += kBlock) {
    const Eigen::Index n = std::min(kBlock, N - start);
    const auto rows = Y_.middleRows(start, n);
    margins.noalias() = rows * w;
    hinge += (1.0 - margins.array()).max(0.0).sum();
    if (g) active_sum.noalias() += rows.transpose() * (margins.array() <= 1.0).cast<double>().matrix();
  }
  const double inv_n = 1.0 / static_cast<double>(N);
  if (g) *g = rho_ * w - active_sum * inv_n;
  return 0.5 * rho_ * w.squaredNorm() + hinge * inv_n;
}

double SvmEmpiricalRisk::risk(const Iterate& w) const { return evaluate(w, nullptr); }

double SvmEmpiricalRisk::risk_and_subgradient(const Iterate& w, Vector& g) const { return evaluate(w, &g); }

Vector SvmEmpiricalRisk::subgradient(const Iterate& w) const {
  Vector g;
  evaluate(w, &g);
  return g;
}

SvmOracleResult svm_empirical_minimizer(const SvmEmpiricalRisk& emp, std::size_t iterations) {
  const auto M = static_cast<Eigen::Index>(emp.dimension());
  Iterate w = Iterate::Zero(M);
  Iterate avg = Iterate::Zero(M);
  double weight = 0.0;
  Vector g;
  SvmOracleResult best{w, emp.risk(w)};
  for (std::size_t k = 1; k <= iterations; ++k) {
    const double r = emp.risk_and_subgradient(w, g);
    if (r < best.risk_star) best = {w, r};
    weight += static_cast<double>(k);
    avg += (static_cast<double>(k) / weight) * (w - avg);
    w -= g / (emp.rho() * static_cast<double>(k + 1));
    if (k % 100 == 0 || k == iterations) {
      const double ra = emp.risk(avg);
      if (ra < best.risk_star) best = {avg, ra};
    }
  }
  const double r = emp.risk(w);
  if (r < best.risk_star) best = {w, r};
  return best;
}

// --- LASSO -------------------------------------------------------------------

LassoProblem::LassoProblem(double delta, Vector w_true, Matrix R_h, double sigma_n2)
    : delta_(delta), w_true_(std::move(w_true)), R_h_(std::move(R_h)), sigma_n2_(sigma_n2) {
  if (!(delta_ >= 0.0) || !std::isfinite(delta_)) throw InvalidArgument("LASSO delta must be nonnegative");
  if (!(sigma_n2_ >= 0.0)) throw InvalidArgument("noise variance must be nonnegative");
  if (w_true_.size() == 0) throw InvalidArgument("LASSO dimension must be positive");
  if (!w_true_.allFinite()) throw NumericError("w_true has non-finite entries");
  if (R_h_.rows() != w_true_.size() || R_h_.cols() != w_true_.size()) {
    throw InvalidArgument("R_h must be square with the dimension of w_true");
  }
  if (!R_h_.allFinite()) throw NumericError("R_h has non-finite entries");
  if ((R_h_ - R_h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + R_h_.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("R_h must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(R_h_, Eigen::EigenvaluesOnly);
  lambda_min_ = eig.eigenvalues().minCoeff();
  lambda_max_ = eig.eigenvalues().maxCoeff();
  if (!(lambda_min_ > 0.0)) throw InvalidArgument("R_h must be positive definite");
  identity_ = (R_h_ - Matrix::Identity(R_h_.rows(), R_h_.cols())).cwiseAbs().maxCoeff() == 0.0;
}

Vector LassoProblem::instantaneous_subgradient(const Iterate& w, const Sample& s) const {
  return lasso_instantaneous_subgradient(*this, w, s);
}

Vector lasso_instantaneous_subgradient(const LassoProblem& p, const Iterate& w, const Sample& s) {
  require_dim(w.size(), p.dimension(), "iterate");
  require_dim(s.h.size(), p.dimension(), "regression vector");
  const double residual = s.gamma - s.h.dot(w);
  Vector g = p.delta() * sign(w);
  g.noalias() -= residual * s.h;
  return g;
}

Vector lasso_true_subgradient(const LassoProblem& p, const Iterate& w) {
  require_dim(w.size(), p.dimension(), "iterate");
  return -(p.R_h() * (p.w_true() - w)) + p.delta() * sign(w);
}

double lasso_risk_closed_form(const LassoProblem& p, const Iterate& w) {
  require_dim(w.size(), p.dimension(), "iterate");
  const Vector d = w - p.w_true();
  return 0.5 * d.dot(p.R_h() * d) + 0.5 * p.sigma_n2() + p.delta() * w.lpNorm<1>();
}

Vector soft_threshold(const Vector& x, double delta) {
  if (!(delta >= 0.0)) throw InvalidArgument("soft-threshold parameter must be nonnegative");
  return x.unaryExpr([delta](double v) { return sgn(v) * std::max(0.0, std::abs(v) - delta); });
}

Iterate lasso_optimum(const LassoProblem& p) {
  if (!p.covariance_is_identity()) {
    throw UnsupportedConfiguration("closed-form LASSO optimum requires R_h = I");
  }
  Iterate w_star = soft_threshold(p.w_true(), p.delta());
  // 0 must lie in the subdifferential (w* - w_true) + delta * T(w*).
  const double tol = 1e-12 * (1.0 + p.w_true().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < w_star.size(); ++j) {
    const double residual = w_star[j] - p.w_true()[j];
    const bool ok = w_star[j] != 0.0 ? std::abs(residual + p.delta() * sgn(w_star[j])) <= tol
                                     : std::abs(residual) <= p.delta() + tol;
    if (!ok) throw NumericError("soft-threshold optimum fails the optimality condition");
  }
  return w_star;
}

RiskOracle lasso_risk_oracle(const LassoProblem& p) {
  Iterate w_star = lasso_optimum(p);
  const double j_star = lasso_risk_closed_form(p, w_star);
  return RiskOracle{[p](const Iterate& w) { return lasso_risk_closed_form(p, w); }, std::move(w_star), j_star};
}

// --- TV denoising ------------------------------------------------------------

double tv_value(const GrayImage& img) {
  const Matrix& I = img.pixels;
  const Eigen::Index r = I.rows(), c = I.cols();
  const double vertical = (I.topRows(r - 1) - I.bottomRows(r - 1)).cwiseAbs().sum();
  const double horizontal = (I.leftCols(c - 1) - I.rightCols(c - 1)).cwiseAbs().sum();
  return vertical + horizontal;
}

double tv_objective(const GrayImage& img, const GrayImage& noisy, double lambda) {
  if (!img.same_shape(noisy)) throw InvalidArgument("tv_objective: image shapes differ");
  return 0.5 * (img.pixels - noisy.pixels).squaredNorm() + lambda * tv_value(img);
}

GrayImage tv_subgradient_step(const GrayImage& img, const GrayImage& noisy, double mu, double lambda) {
  if (!img.same_shape(noisy)) throw InvalidArgument("tv_subgradient_step: image shapes differ");
  const Matrix& I = img.pixels;
  const Eigen::Index r = I.rows(), c = I.cols();
  auto sgn_of = [](auto&& expr) { return expr.unaryExpr([](double v) { return sgn(v); }).eval(); };

  Matrix tv = Matrix::Zero(r, c);
  const Matrix dv = sgn_of(I.topRows(r - 1) - I.bottomRows(r - 1));
  tv.topRows(r - 1) += dv;
  tv.bottomRows(r - 1) -= dv;
  const Matrix dh = sgn_of(I.leftCols(c - 1) - I.rightCols(c - 1));
  tv.leftCols(c - 1) += dh;
  tv.rightCols(c - 1) -= dh;

  GrayImage out = img;
  out.pixels = I - mu * ((I - noisy.pixels) + lambda * tv);
  return out;
}

TvDenoiseResult tv_denoise(const GrayImage& noisy, double lambda, double mu, std::size_t iterations, double kappa) {
  if (!(mu > 0.0)) throw InvalidArgument("step size mu must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("TV weight lambda must be nonnegative");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw InvalidArgument("smoothing factor kappa must lie in [0, 1)");
  GrayImage cur = noisy;
  GrayImage bar = noisy;
  double S = 1.0;
  for (std::size_t i = 0; i < iterations; ++i) {
    cur = tv_subgradient_step(cur, noisy, mu, lambda);
    S = kappa * S + 1.0;
    bar.pixels += (cur.pixels - bar.pixels) / S;
  }
  return {std::move(bar), std::move(cur)};
}

}  // namespace subgrad
