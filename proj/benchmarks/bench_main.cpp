#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "subgrad/data.hpp"
#include "subgrad/problems.hpp"

using namespace subgrad;

namespace {

LassoProblem lasso(std::size_t M) {
  Vector w = Vector::Zero(static_cast<Eigen::Index>(M));
  w[0] = 1.0;
  w[1] = -1.0;
  return LassoProblem(0.002, w, Matrix::Identity(w.size(), w.size()), 0.01);
}

std::vector<Sample> svm_samples(std::size_t n, std::size_t M) {
  const auto dim = static_cast<Eigen::Index>(M);
  SvmGaussianStream s({Vector::Constant(dim, 0.5), Vector::Constant(dim, -0.5), Matrix::Identity(dim, dim),
                       Matrix::Identity(dim, dim), 0.5, 0.5},
                      1);
  std::vector<Sample> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(*s.next());
  return out;
}

}  // namespace

static void BM_LassoStep(benchmark::State& state) {
  const auto p = lasso(static_cast<std::size_t>(state.range(0)));
  RegressionStream stream({p.w_true(), p.R_h(), p.sigma_n2()}, 1);
  Iterate w = Iterate::Zero(p.w_true().size());
  for (auto _ : state) {
    const Sample s = *stream.next();
    sgd_step_in_place(w, lasso_instantaneous_subgradient(p, w, s), 0.001);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_LassoStep)->Arg(10)->Arg(100)->Arg(1000);

static void BM_SmoothingUpdate(benchmark::State& state) {
  const auto M = static_cast<Eigen::Index>(state.range(0));
  auto st = SmoothingState::start(Vector::Zero(M), 0.999);
  const Vector w = Vector::Ones(M);
  for (auto _ : state) {
    st.absorb(w);
    benchmark::DoNotOptimize(st.w_bar.data());
  }
}
BENCHMARK(BM_SmoothingUpdate)->Arg(100)->Arg(10000);

static void BM_TvStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const GrayImage noisy = add_gaussian_noise(make_piecewise_constant_image(n, n), 0.1, 1);
  GrayImage img = noisy;
  for (auto _ : state) {
    img = tv_subgradient_step(img, noisy, 0.002, 0.08);
    benchmark::DoNotOptimize(img.pixels.data());
  }
}
BENCHMARK(BM_TvStep)->Arg(64)->Arg(512);

static void BM_ParseLibsvm(benchmark::State& state) {
  Rng rng(2);
  std::string text;
  for (int k = 0; k < 1000; ++k) {
    text += rng.uniform() < 0.5 ? "-1" : "+1";
    for (int j = 1; j <= 123; j += 1 + static_cast<int>(rng.below(8))) text += " " + std::to_string(j) + ":1";
    text += '\n';
  }
  for (auto _ : state) benchmark::DoNotOptimize(parse_libsvm(text));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseLibsvm);

static void BM_SvmEmpiricalRisk(benchmark::State& state) {
  const auto samples = svm_samples(static_cast<std::size_t>(state.range(0)), 4);
  const SvmEmpiricalRisk emp(0.01, samples);
  const Vector w = Vector::Constant(4, 0.3);
  Vector g;
  for (auto _ : state) benchmark::DoNotOptimize(emp.risk_and_subgradient(w, g));
}
BENCHMARK(BM_SvmEmpiricalRisk)->Arg(10000)->Arg(100000);
BENCHMARK_MAIN();
