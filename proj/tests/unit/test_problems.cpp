#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "subgrad/data.hpp"
#include "subgrad/problems.hpp"
#include "subgrad/random.hpp"

using namespace subgrad;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

// Loop-based TV with explicit neighbor lists, independent of the shift code.
double tv_oracle(const Matrix& x) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (c + 1 < x.cols()) total += std::abs(x(r, c + 1) - x(r, c));
      if (r + 1 < x.rows()) total += std::abs(x(r + 1, c) - x(r, c));
    }
  return total;
}

Matrix tv_step_oracle(const Matrix& x, const Matrix& y, double mu, double lambda) {
  auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
  Matrix out = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double g = x(r, c) - y(r, c);
      const int dr[] = {-1, 1, 0, 0};
      const int dc[] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const Eigen::Index rr = r + dr[k], cc = c + dc[k];
        if (rr < 0 || cc < 0 || rr >= x.rows() || cc >= x.cols()) continue;
        g += lambda * sgn(x(r, c) - x(rr, cc));
      }
      out(r, c) = x(r, c) - mu * g;
    }
  return out;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal();
  return m;
}

}  // namespace

TEST(Sign, ZeroMapsToZero) { EXPECT_EQ(sign(vec({-2.0, 0.0, 3.0})), vec({-1.0, 0.0, 1.0})); }

TEST(Svm, InstantaneousSubgradientCases) {
  const SvmProblem p(0.1, 2);
  // Active hinge: gamma h'w = 0 <= 1.
  EXPECT_EQ(svm_instantaneous_subgradient(p, vec({0, 0}), {vec({1, 0}), 1.0}), vec({-1, 0}));
  // Inactive: gamma h'w = 2 > 1.
  const Vector g = svm_instantaneous_subgradient(p, vec({2, 0}), {vec({1, 0}), 1.0});
  EXPECT_DOUBLE_EQ(g[0], 0.2);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  // Margin exactly one counts as active.
  const Vector tie = svm_instantaneous_subgradient(p, vec({1, 0}), {vec({1, 0}), 1.0});
  EXPECT_DOUBLE_EQ(tie[0], 0.1 - 1.0);
}

TEST(Svm, RejectsBadLabelsAndDimensions) {
  const SvmProblem p(0.1, 2);
  EXPECT_THROW(svm_instantaneous_subgradient(p, vec({0, 0}), {vec({1, 0}), 0.5}), InvalidArgument);
  EXPECT_THROW(svm_instantaneous_subgradient(p, vec({0, 0}), {vec({1, 0, 0}), 1.0}), InvalidArgument);
  EXPECT_THROW(SvmProblem(-1.0, 2), InvalidArgument);
}

TEST(Svm, HingeLossArithmetic) {
  EXPECT_DOUBLE_EQ(hinge_loss(vec({0, 0}), {vec({1, 0}), 1.0}, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(hinge_loss(vec({2, 0}), {vec({1, 0}), 1.0}, 0.1), 0.2);
  EXPECT_DOUBLE_EQ(hinge_loss(vec({0.5, 0}), {vec({1, 0}), -1.0}, 0.0), 1.5);
}

TEST(Svm, EmpiricalRiskAgreesWithSampleLoops) {
  SvmGaussianStream stream({vec({0.5, 0.5, 0.5}), vec({-0.5, -0.5, -0.5}), Matrix::Identity(3, 3),
                            Matrix::Identity(3, 3), 0.5, 0.5},
                           3);
  std::vector<Sample> samples;
  for (int k = 0; k < 1000; ++k) samples.push_back(*stream.next());
  const SvmProblem p(0.01, 3);
  const SvmEmpiricalRisk emp(0.01, samples);
  EXPECT_EQ(emp.size(), 1000u);
  EXPECT_EQ(emp.dimension(), 3u);
  double trace = 0.0;
  for (const auto& s : samples) trace += s.h.squaredNorm();
  EXPECT_NEAR(emp.trace_second_moment(), trace / 1000.0, 1e-12);

  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Vector w(3);
    rng.fill_normal(w);
    double hinge = 0.0;
    Vector g = 0.01 * w;
    for (const auto& s : samples) {
      const double m = s.gamma * s.h.dot(w);
      hinge += std::max(0.0, 1.0 - m);
      if (m <= 1.0) g -= s.gamma * s.h / 1000.0;
    }
    const double risk = 0.005 * w.squaredNorm() + hinge / 1000.0;
    EXPECT_NEAR(emp.risk(w), risk, 1e-12);
    EXPECT_NEAR(svm_empirical_risk(p, w, samples), risk, 1e-12);
    EXPECT_LE((emp.subgradient(w) - g).norm(), 1e-12);
    EXPECT_LE((svm_empirical_subgradient(p, w, samples) - g).norm(), 1e-12);
    Vector g2;
    EXPECT_NEAR(emp.risk_and_subgradient(w, g2), risk, 1e-12);
    EXPECT_LE((g2 - g).norm(), 1e-12);
  }
}

TEST(Svm, EmpiricalMinimizerIsNearStationary) {
  SvmGaussianStream stream({vec({0.5, 0.5}), vec({-0.5, -0.5}), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                            0.5, 0.5},
                           4);
  std::vector<Sample> samples;
  for (int k = 0; k < 2000; ++k) samples.push_back(*stream.next());
  const SvmEmpiricalRisk emp(0.05, samples);
  const auto best = svm_empirical_minimizer(emp, 5000);
  EXPECT_NEAR(emp.risk(best.w_star), best.risk_star, 1e-15);
  // No direction improves the risk by more than a tiny amount.
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    Vector d(2);
    rng.fill_normal(d);
    EXPECT_GE(emp.risk(best.w_star + 1e-2 * d), best.risk_star - 1e-6);
  }
}

TEST(Lasso, SubgradientMatchesSpecExample) {
  const LassoProblem p(0.1, vec({0.0}), Matrix::Identity(1, 1), 0.0);
  EXPECT_DOUBLE_EQ(lasso_instantaneous_subgradient(p, vec({1.0}), {vec({1.0}), 2.0})[0], -0.9);
  // Sign of zero is zero, so no regularizer contribution at w = 0.
  EXPECT_DOUBLE_EQ(lasso_instantaneous_subgradient(p, vec({0.0}), {vec({1.0}), 2.0})[0], -2.0);
}

TEST(Lasso, ValidatesConstruction) {
  EXPECT_THROW(LassoProblem(-0.1, vec({0.0}), Matrix::Identity(1, 1), 0.0), InvalidArgument);
  EXPECT_THROW(LassoProblem(0.1, vec({0.0}), Matrix::Identity(1, 1), -1.0), InvalidArgument);
  EXPECT_THROW(LassoProblem(0.1, vec({0.0, 0.0}), Matrix::Identity(1, 1), 0.0), InvalidArgument);
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;  // indefinite
  EXPECT_THROW(LassoProblem(0.1, vec({0.0, 0.0}), bad, 0.0), InvalidArgument);
}

TEST(Lasso, TrueSubgradientIsMeanOfInstantaneous) {
  Matrix R(2, 2);
  R << 2.0, 0.5, 0.5, 1.0;
  const LassoProblem p(0.05, vec({1.0, -0.5}), R, 0.2);
  RegressionStream stream({p.w_true(), p.R_h(), p.sigma_n2()}, 21);
  const Vector w = vec({0.3, 0.4});
  Vector acc = Vector::Zero(2);
  const int n = 200000;
  for (int k = 0; k < n; ++k) acc += lasso_instantaneous_subgradient(p, w, *stream.next());
  acc /= n;
  EXPECT_LE((acc - lasso_true_subgradient(p, w)).norm(), 0.02);
}

TEST(Lasso, ClosedFormRiskGradientMatchesFiniteDifferences) {
  Matrix R(3, 3);
  R << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 1.0;
  const LassoProblem p(0.07, vec({1.0, -2.0, 0.5}), R, 0.3);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    Vector w(3);
    rng.fill_normal(w);
    const Vector g = lasso_true_subgradient(p, w);
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < 3; ++j) {
      Vector e = Vector::Zero(3);
      e[j] = h;
      const double fd = (lasso_risk_closed_form(p, w + e) - lasso_risk_closed_form(p, w - e)) / (2 * h);
      EXPECT_NEAR(fd, g[j], 1e-6);
    }
  }
}

TEST(Lasso, ClosedFormRiskMatchesMonteCarlo) {
  const LassoProblem p(0.02, vec({1.0, -1.0, 0.0}), Matrix::Identity(3, 3), 0.1);
  RegressionStream stream({p.w_true(), p.R_h(), p.sigma_n2()}, 8);
  const Vector w = vec({0.2, 0.1, -0.4});
  double acc = 0.0;
  const int n = 400000;
  for (int k = 0; k < n; ++k) {
    const Sample s = *stream.next();
    const double e = s.gamma - s.h.dot(w);
    acc += 0.5 * e * e;
  }
  const double mc = acc / n + 0.02 * w.lpNorm<1>();
  EXPECT_NEAR(mc, lasso_risk_closed_form(p, w), 0.01);
}

TEST(Lasso, OptimumIsSoftThresholdAndMinimizes) {
  EXPECT_LE((soft_threshold(vec({1.0, -1.0, 0.001, -0.3}), 0.1) - vec({0.9, -0.9, 0.0, -0.2})).norm(), 1e-15);
  const LassoProblem p(0.1, vec({1.0, -1.0, 0.05}), Matrix::Identity(3, 3), 0.01);
  const Iterate w_star = lasso_optimum(p);
  EXPECT_EQ(w_star, soft_threshold(p.w_true(), 0.1));
  Rng rng(12);
  const double j_star = lasso_risk_closed_form(p, w_star);
  for (int k = 0; k < 500; ++k) {
    Vector d(3);
    rng.fill_normal(d);
    EXPECT_GE(lasso_risk_closed_form(p, w_star + 0.1 * d), j_star);
  }
  const auto oracle = lasso_risk_oracle(p);
  EXPECT_EQ(oracle.risk_star, j_star);
  EXPECT_EQ(oracle.w_star, w_star);
}

TEST(Lasso, OptimumNeedsIdentityCovariance) {
  const LassoProblem p(0.1, vec({1.0, -1.0}), 2.0 * Matrix::Identity(2, 2), 0.01);
  EXPECT_THROW(lasso_optimum(p), UnsupportedConfiguration);
  EXPECT_DOUBLE_EQ(p.min_eigenvalue(), 2.0);
  EXPECT_DOUBLE_EQ(p.max_eigenvalue(), 2.0);
}

TEST(Tv, ValueMatchesLoopOracle) {
  Matrix px(2, 2);
  px << 0, 1, 1, 0;
  EXPECT_DOUBLE_EQ(tv_value(GrayImage(px, 1.0)), 4.0);
  EXPECT_DOUBLE_EQ(tv_value(GrayImage(Matrix::Constant(5, 7, 0.3), 1.0)), 0.0);
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const Matrix m = random_matrix(3 + t, 8 - t / 2, rng);
    EXPECT_NEAR(tv_value(GrayImage(m, 1.0)), tv_oracle(m), 1e-11);
  }
}

TEST(Tv, ObjectiveOfNoisyItselfIsLambdaTimesTv) {
  Rng rng(2);
  const GrayImage y(random_matrix(6, 5, rng), 1.0);
  EXPECT_NEAR(tv_objective(y, y, 0.3), 0.3 * tv_oracle(y.pixels), 1e-12);
}

TEST(Tv, StepMatchesLoopOracle) {
  Rng rng(23);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = random_matrix(2 + t, 2 + (t * 3) % 7, rng);
    const Matrix y = random_matrix(x.rows(), x.cols(), rng);
    const GrayImage out = tv_subgradient_step(GrayImage(x, 1.0), GrayImage(y, 1.0), 0.05, 0.2);
    EXPECT_LE((out.pixels - tv_step_oracle(x, y, 0.05, 0.2)).cwiseAbs().maxCoeff(), 1e-14);
  }
  // Flat image equal to the noisy one is a fixed point.
  const GrayImage flat(Matrix::Constant(4, 4, 0.5), 1.0);
  EXPECT_EQ(tv_subgradient_step(flat, flat, 0.1, 0.3).pixels, flat.pixels);
  EXPECT_THROW(tv_subgradient_step(flat, GrayImage(Matrix::Zero(3, 4), 1.0), 0.1, 0.3), InvalidArgument);
}

TEST(Tv, DenoiseLowersObjectiveAndImprovesPsnr) {
  const GrayImage clean = make_piecewise_constant_image(32, 32);
  const GrayImage noisy = add_gaussian_noise(clean, 0.1, 5);
  const auto res = tv_denoise(noisy, 0.08, 0.002, 300, 1.0 - 0.002 + 2 * 0.002 * 0.002);
  EXPECT_LT(tv_objective(res.last, noisy, 0.08), tv_objective(noisy, noisy, 0.08));
  EXPECT_GT(psnr(res.smoothed, clean), psnr(noisy, clean) + 2.0);
}

TEST(Tv, DenoiseWithZeroIterationsReturnsInput) {
  const GrayImage noisy = add_gaussian_noise(make_piecewise_constant_image(8, 8), 0.1, 5);
  const auto res = tv_denoise(noisy, 0.08, 0.01, 0, 0.5);
  EXPECT_EQ(res.smoothed.pixels, noisy.pixels);
  EXPECT_EQ(res.last.pixels, noisy.pixels);
  EXPECT_THROW(tv_denoise(noisy, 0.08, 0.0, 10, 0.5), InvalidArgument);
  EXPECT_THROW(tv_denoise(noisy, 0.08, 0.01, 10, 1.0), InvalidArgument);
}

TEST(Tv, HandCountAndPureFidelityStep) {
  Matrix px(2, 2);
  px << 0, 1, 0, 1;
  EXPECT_DOUBLE_EQ(tv_value(GrayImage(px, 1.0)), 2.0);
  Rng rng(4);
  const Matrix x = random_matrix(5, 6, rng), y = random_matrix(5, 6, rng);
  const GrayImage out = tv_subgradient_step(GrayImage(x, 1.0), GrayImage(y, 1.0), 0.3, 0.0);
  EXPECT_LE((out.pixels - (0.7 * x + 0.3 * y)).cwiseAbs().maxCoeff(), 1e-15);
  const GrayImage full = tv_subgradient_step(GrayImage(x, 1.0), GrayImage(y, 1.0), 1.0, 0.0);
  EXPECT_LE((full.pixels - y).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lasso, SpecialPoints) {
  const LassoProblem p(0.002, vec({0.5, -0.3}), Matrix::Identity(2, 2), 0.01);
  EXPECT_EQ(lasso_instantaneous_subgradient(p, vec({0, 0}), {vec({1, 0}), 1.0}), vec({-1.0, 0.0}));
  const Sample clean{vec({0.7, 1.1}), 0.7 * 0.5 - 1.1 * 0.3};
  const Vector at_true = lasso_instantaneous_subgradient(p, p.w_true(), clean);
  EXPECT_NEAR(at_true[0], 0.002, 1e-16);
  EXPECT_NEAR(at_true[1], -0.002, 1e-16);
  EXPECT_LE((lasso_true_subgradient(p, lasso_optimum(p))).norm(), 1e-16);
  EXPECT_DOUBLE_EQ(lasso_risk_closed_form(LassoProblem(0.0, p.w_true(), p.R_h(), 0.01), p.w_true()), 0.005);
  EXPECT_DOUBLE_EQ(lasso_risk_closed_form(p, vec({0, 0})), 0.5 * (0.25 + 0.09) + 0.005);
}

TEST(Lasso, SoftThresholdExamples) {
  EXPECT_DOUBLE_EQ(soft_threshold(vec({0.5}), 0.002)[0], 0.498);
  EXPECT_EQ(soft_threshold(vec({0.001}), 0.002)[0], 0.0);
  EXPECT_DOUBLE_EQ(soft_threshold(vec({-0.5}), 0.002)[0], -0.498);
  const LassoProblem big(2.0, vec({1.0, -1.0, 0.0}), Matrix::Identity(3, 3), 0.01);
  EXPECT_EQ(lasso_optimum(big), Vector::Zero(3));
}

TEST(Svm, MonteCarloHelpers) {
  const SvmProblem p(0.1, 2);
  std::vector<Sample> one{{vec({0.3, -0.2}), -1.0}};
  SequentialStream s1(one);
  const Vector w = vec({0.4, 0.9});
  EXPECT_EQ(svm_true_subgradient_mc(p, w, s1, 1), svm_instantaneous_subgradient(p, w, one[0]));

  SvmGaussianStream stream({vec({0.5, 0.5}), vec({-0.5, -0.5}), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                            0.5, 0.5},
                           6);
  EXPECT_DOUBLE_EQ(svm_risk_mc(p, Vector::Zero(2), stream, 1000), 1.0);
  // At w = 0 every indicator is active, so the mean is -E gamma h = -m.
  const Vector g = svm_true_subgradient_mc(p, Vector::Zero(2), stream, 200000);
  EXPECT_NEAR(g[0], -0.5, 3.0 * 1.0 / std::sqrt(200000.0));
  EXPECT_NEAR(g[1], -0.5, 3.0 * 1.0 / std::sqrt(200000.0));

  std::vector<Sample> sep{{vec({1.0, 0.0}), 1.0}, {vec({-1.0, 0.0}), -1.0}};
  SequentialStream s2(sep);
  const Vector ws = vec({3.0, 0.0});
  EXPECT_DOUBLE_EQ(svm_risk_mc(p, ws, s2, 2), 0.05 * 9.0);
  EXPECT_DOUBLE_EQ(hinge_loss(vec({1.0, 0.0}), sep[0], 0.1), 0.05);
}
