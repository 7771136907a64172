#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "subgrad/data.hpp"
#include "subgrad/engine.hpp"
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

double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

// J(w) = 1/2 |w - target|^2 with exact gradients; the sample is ignored.
struct Quadratic {
  Vector target;
  std::size_t dimension() const { return static_cast<std::size_t>(target.size()); }
  Vector instantaneous_subgradient(const Iterate& w, const Sample&) const { return w - target; }
};

struct ConstantStream {
  std::size_t remaining;
  std::optional<Sample> next() {
    if (remaining == 0) return std::nullopt;
    --remaining;
    return Sample{Vector::Zero(1), 0.0};
  }
};

LassoProblem small_lasso() {
  return LassoProblem(0.002, vec({1.0, -1.0, 0.0, 0.0, 0.0}), Matrix::Identity(5, 5), 0.01);
}

}  // namespace

TEST(SgdStep, ZeroSubgradientIsAFixedPoint) {
  EXPECT_EQ(sgd_step(vec({0, 0}), vec({0, 0}), 0.1), vec({0, 0}));
}

TEST(SgdStep, OneStepArithmetic) { EXPECT_DOUBLE_EQ(sgd_step(vec({1}), vec({2}), 0.1)[0], 0.8); }

TEST(SgdStep, ComposesWithLassoSubgradient) {
  const LassoProblem p(0.002, vec({1.0, -1.0}), Matrix::Identity(2, 2), 0.01);
  const Vector w = vec({0.5, -0.5});
  const Sample s{vec({0.3, -0.7}), 0.25};
  const Vector out = sgd_step(w, lasso_instantaneous_subgradient(p, w, s), 0.1);
  // residual = 0.25 - (0.15 + 0.35) = -0.25; g = -h*residual + delta*sgn(w)
  const double g0 = -0.3 * -0.25 + 0.002;
  const double g1 = 0.7 * -0.25 - 0.002;
  EXPECT_NEAR(out[0], 0.5 - 0.1 * g0, 1e-15);
  EXPECT_NEAR(out[1], -0.5 - 0.1 * g1, 1e-15);
}

TEST(SgdStep, RejectsBadInput) {
  EXPECT_THROW(sgd_step(vec({1, 2}), vec({1}), 0.1), InvalidArgument);
  EXPECT_THROW(sgd_step(vec({1}), vec({NAN}), 0.1), NumericError);
  EXPECT_THROW(sgd_step(vec({INFINITY}), vec({0}), 0.1), NumericError);
}

TEST(Smoothing, HandExample) {
  auto st = SmoothingState::start(vec({1}), 0.5);
  st = smoothing_update(st, vec({4}));
  EXPECT_DOUBLE_EQ(st.S, 1.5);
  EXPECT_DOUBLE_EQ(st.w_bar[0], 3.0);
}

TEST(Smoothing, ZeroKappaKeepsLastIterate) {
  auto st = SmoothingState::start(vec({2}), 0.0);
  st = smoothing_update(st, vec({9}));
  st = smoothing_update(st, vec({7}));
  EXPECT_EQ(st.S, 1.0);
  EXPECT_EQ(st.w_bar[0], 7.0);
}

TEST(Smoothing, ConstantIterateAndGeometricSum) {
  const double c = 3.25;
  auto st = SmoothingState::start(vec({c}), 0.999);
  for (int i = 0; i < 10000; ++i) st.absorb(vec({c}));
  EXPECT_NEAR(st.w_bar[0], c, 1e-12);
  const double expected = (1.0 - std::pow(0.999, 10001)) / 0.001;
  EXPECT_NEAR(st.S, expected, 1e-12 * expected);
  EXPECT_NEAR(geometric_sum(0.999, 10000), expected, 1e-12 * expected);
}

TEST(Smoothing, StartRejectsKappaOutsideUnitInterval) {
  EXPECT_THROW(SmoothingState::start(vec({0}), 1.0), InvalidArgument);
  EXPECT_THROW(SmoothingState::start(vec({0}), -0.1), InvalidArgument);
}

TEST(Smoothing, RecursionMatchesDirectWeightsOnRandomSequences) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t len = 1 + rng.below(1000);
    const double kappa = trial == 0 ? 0.0 : rng.uniform() * 0.9999;
    std::vector<Iterate> seq;
    for (std::size_t k = 0; k < len; ++k) {
      Vector v(3);
      rng.fill_normal(v);
      seq.push_back(v);
    }
    auto st = SmoothingState::start(seq[0], kappa);
    for (std::size_t k = 1; k < len; ++k) st.absorb(seq[k]);
    const Iterate direct = weighted_average_direct(seq, kappa);
    EXPECT_LE(rel_err(st.w_bar, direct), 1e-10) << "trial " << trial << " len " << len << " kappa " << kappa;
    const double S = geometric_sum(kappa, len - 1);
    EXPECT_LE(std::abs(st.S - S), 1e-12 * S);
  }
}

TEST(Smoothing, ScalarAverageStaysInsideRange) {
  Rng rng(5);
  auto st = SmoothingState::start(vec({0.0}), 0.97);
  double lo = 0.0, hi = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const double x = rng.normal() * 10.0;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    st.absorb(vec({x}));
    ASSERT_GE(st.w_bar[0], lo);
    ASSERT_LE(st.w_bar[0], hi);
  }
}

TEST(Smoothing, SConvergesToLimit) {
  for (double kappa : {0.5, 0.9, 0.999}) {
    auto st = SmoothingState::start(vec({0}), kappa);
    const auto steps = static_cast<int>(std::ceil(40.0 / (1.0 - kappa)));
    for (int k = 0; k < steps; ++k) st.absorb(vec({0}));
    EXPECT_NEAR(st.S, 1.0 / (1.0 - kappa), 1e-9 * (1.0 / (1.0 - kappa))) << kappa;
  }
}

TEST(WeightedAverageDirect, SmallCases) {
  std::vector<Iterate> one{vec({5})};
  EXPECT_EQ(weighted_average_direct(one, 0.3)[0], 5.0);
  std::vector<Iterate> two{vec({1}), vec({4})};
  EXPECT_DOUBLE_EQ(weighted_average_direct(two, 0.5)[0], 3.0);
  EXPECT_THROW(weighted_average_direct(std::vector<Iterate>{}, 0.5), InvalidArgument);
}

TEST(Pocket, KeepsLowerRiskAndIncumbentOnTie) {
  Pocket best{vec({1}), 1.0};
  auto p = pocket_update(best, vec({2}), 0.5);
  EXPECT_EQ(p.w[0], 2.0);
  EXPECT_EQ(p.risk, 0.5);
  auto q = pocket_update(best, vec({2}), 1.0);
  EXPECT_EQ(q.w[0], 1.0);
  EXPECT_THROW(pocket_update(best, vec({2}), NAN), NumericError);
}

TEST(ResolveKappa, ExplicitAndAutomatic) {
  EXPECT_EQ(resolve_kappa(0.9, std::nullopt), 0.9);
  EXPECT_EQ(resolve_kappa(std::nullopt, 0.999), 0.999);
  EXPECT_THROW(resolve_kappa(1.0, std::nullopt), InvalidArgument);
  try {
    resolve_kappa(std::nullopt, 1.04);
    FAIL() << "expected InvalidConfiguration";
  } catch (const InvalidConfiguration& e) {
    EXPECT_NE(std::string(e.what()).find("eta/(e^2+beta^2)"), std::string::npos) << e.what();
  }
}

TEST(Run, ZeroIterationsReturnsInitialState) {
  const auto p = small_lasso();
  const RiskOracle oracle = lasso_risk_oracle(p);
  RegressionStream stream({p.w_true(), p.R_h(), p.sigma_n2()}, 1);
  RunConfig cfg;
  cfg.mu = 0.001;
  cfg.kappa = 0.99;
  cfg.iterations = 0;
  RunOptions opts;
  opts.oracle = &oracle;
  const auto res = run(p, stream, cfg, opts);
  EXPECT_EQ(res.w, Vector::Zero(5));
  EXPECT_EQ(res.smoothing.S, 1.0);
  EXPECT_EQ(res.trajectory.size(), 0u);
}

TEST(Run, StreamExhaustionIsAnError) {
  Quadratic q{vec({1.0})};
  ConstantStream s{5};
  RunConfig cfg;
  cfg.mu = 0.1;
  cfg.kappa = 0.5;
  cfg.iterations = 10;
  EXPECT_THROW(run(q, s, cfg), StreamExhausted);
}

TEST(Run, DeterministicQuadraticConvergesLinearly) {
  const Vector target = vec({2.0, -1.0, 0.5});
  Quadratic q{target};
  ConstantStream s{100000};
  RunConfig cfg;
  cfg.mu = 0.1;
  cfg.kappa = 0.5;
  cfg.iterations = 50;
  cfg.record_stride = 1;
  const auto res = run(q, s, cfg);
  // w_i = target (1 - (1 - mu)^i) from w_0 = 0.
  EXPECT_LE((res.w - target * (1.0 - std::pow(0.9, 50))).norm(), 1e-14);

  cfg.iterations = 1000;
  s.remaining = 1000;
  const auto far = run(q, s, cfg);
  EXPECT_LE((far.w - target).norm(), 1e-14);
  // Raw iterates without an oracle are recorded for every stride point.
  EXPECT_EQ(far.trajectory.raw_iterates.size(), 1000u);
  EXPECT_FALSE(far.trajectory.has_risk());
}

TEST(Run, RecordsEveryStrideAndPocketIsNonincreasing) {
  const auto p = small_lasso();
  const RiskOracle oracle = lasso_risk_oracle(p);
  RegressionStream stream({p.w_true(), p.R_h(), p.sigma_n2()}, 7);
  RunConfig cfg;
  cfg.mu = 0.01;
  cfg.kappa = 0.99;
  cfg.iterations = 5000;
  cfg.record_stride = 50;
  RunOptions opts;
  opts.oracle = &oracle;
  opts.track_pocket = true;
  const auto res = run(p, stream, cfg, opts);
  const auto& t = res.trajectory;
  ASSERT_EQ(t.size(), 100u);
  EXPECT_EQ(t.iterations.front(), 50u);
  EXPECT_EQ(t.iterations.back(), 5000u);
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LE(t.pocket_excess_risk[k], t.pocket_excess_risk[k - 1]);
  // Recorded values agree with the oracle at the final iterate.
  EXPECT_DOUBLE_EQ(t.excess_risk.back(), oracle.risk(res.w) - oracle.risk_star);
  EXPECT_DOUBLE_EQ(t.msd.back(), (res.w - oracle.w_star).squaredNorm());
  EXPECT_DOUBLE_EQ(t.smoothed_excess_risk.back(), oracle.risk(res.smoothing.w_bar) - oracle.risk_star);
}

TEST(Run, PocketNeedsOracle) {
  Quadratic q{vec({1.0})};
  ConstantStream s{10};
  RunConfig cfg;
  cfg.mu = 0.1;
  cfg.kappa = 0.5;
  cfg.iterations = 10;
  RunOptions opts;
  opts.track_pocket = true;
  EXPECT_THROW(run(q, s, cfg, opts), InvalidArgument);
}

TEST(Run, AutomaticKappaAboveCeilingIsRejected) {
  Quadratic q{vec({1.0})};
  ConstantStream s{10};
  RunConfig cfg;
  cfg.mu = 0.1;
  cfg.iterations = 10;
  RunOptions opts;
  opts.theoretical_alpha = 1.2;
  EXPECT_THROW(run(q, s, cfg, opts), InvalidConfiguration);
}

TEST(RunReplications, DeterministicAndIndependentOfWorkerCount) {
  const auto p = small_lasso();
  const RiskOracle oracle = lasso_risk_oracle(p);
  const RegressionSpec spec{p.w_true(), p.R_h(), p.sigma_n2()};
  RunConfig cfg;
  cfg.mu = 0.01;
  cfg.kappa = 0.99;
  cfg.iterations = 2000;
  cfg.record_stride = 100;
  cfg.seed = 11;
  cfg.replications = 4;
  RunOptions opts;
  opts.oracle = &oracle;
  auto make = [&](std::uint64_t seed) { return RegressionStream(spec, seed); };
  const auto a = run_replications(p, make, cfg, opts, 1);
  const auto b = run_replications(p, make, cfg, opts, 3);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t r = 0; r < a.size(); ++r) {
    EXPECT_EQ(a[r].w, b[r].w);
    EXPECT_EQ(a[r].trajectory.excess_risk, b[r].trajectory.excess_risk);
    EXPECT_EQ(a[r].trajectory.smoothed_excess_risk, b[r].trajectory.smoothed_excess_risk);
  }
  EXPECT_NE(a[0].w, a[1].w);

  // Replication r is a plain run seeded with seed + r.
  RegressionStream single(spec, cfg.seed + 2);
  RunConfig one = cfg;
  one.replications = 1;
  EXPECT_EQ(run(p, single, one, opts).w, a[2].w);
}

TEST(AverageTrajectories, MeanAndStandardError) {
  Trajectory t1, t2, t3;
  for (auto* t : {&t1, &t2, &t3}) {
    t->iterations = {10, 20};
    t->msd = {0, 0};
    t->smoothed_msd = {0, 0};
  }
  t1.excess_risk = {1, 4};
  t2.excess_risk = {2, 5};
  t3.excess_risk = {3, 9};
  t1.smoothed_excess_risk = t1.excess_risk;
  t2.smoothed_excess_risk = t2.excess_risk;
  t3.smoothed_excess_risk = t3.excess_risk;
  std::vector<Trajectory> runs{t1, t2, t3};
  const auto s = average_trajectories(runs);
  EXPECT_DOUBLE_EQ(s.mean.excess_risk[0], 2.0);
  EXPECT_DOUBLE_EQ(s.mean.excess_risk[1], 6.0);
  // sample std of {1,2,3} is 1; of {4,5,9} is sqrt(7)
  EXPECT_NEAR(s.excess_risk_stderr[0], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(s.smoothed_excess_risk_stderr[1], std::sqrt(7.0 / 3.0), 1e-15);

  runs[1].iterations = {10, 30};
  EXPECT_THROW(average_trajectories(runs), InvalidArgument);
}
