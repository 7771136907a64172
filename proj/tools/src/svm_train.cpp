#include <array>
#include <charconv>
#include <chrono>
#include <ostream>

#include <fmt/format.h>

#include "internal.hpp"
#include "subgrad/cli/commands.hpp"

namespace subgrad::cli {

double accuracy(const Vector& w, const std::vector<Sample>& samples) {
  if (samples.empty()) throw InsufficientData("accuracy over an empty sample set");
  std::size_t correct = 0;
  for (const auto& s : samples) {
    const double score = s.h.dot(w);
    if ((score > 0.0 && s.gamma > 0.0) || (score < 0.0 && s.gamma < 0.0)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

SvmTrainOutcome run_svm_train(const ExperimentConfig& cfg) {
  if (!cfg.data.train) throw ConfigError("data.train", "svm-train needs a LIBSVM training file");
  const DatasetFile train_file = read_libsvm_file(*cfg.data.train);
  if (train_file.size() == 0 || train_file.dimension == 0) throw InsufficientData("training file has no samples");
  const std::vector<Sample> train = train_file.dense();
  const std::size_t M = train_file.dimension;

  // Each epoch visits the training set once in a seeded random order.
  Rng order_rng(derive_seed(cfg.run.seed, "svm-order"));
  std::vector<Sample> schedule;
  schedule.reserve(train.size() * cfg.run.epochs);
  std::vector<std::size_t> perm(train.size());
  for (std::size_t e = 0; e < cfg.run.epochs; ++e) {
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
    for (std::size_t k = perm.size(); k > 1; --k) std::swap(perm[k - 1], perm[order_rng.below(k)]);
    for (std::size_t k : perm) schedule.push_back(train[k]);
  }

  SvmTrainOutcome out;
  const double mu = cfg.run.mu, rho = cfg.svm.rho;
  const double alpha_svm = 1.0 - 2.0 * mu * rho + 2.0 * mu * mu * rho * rho;
  out.kappa = resolve_kappa(cfg.run.kappa, alpha_svm);

  const SvmProblem problem(rho, M);
  RunConfig rc;
  rc.mu = mu;
  rc.kappa = out.kappa;
  rc.iterations = schedule.size();
  rc.record_stride = std::max<std::size_t>(1, schedule.size());
  rc.seed = cfg.run.seed;
  SequentialStream stream(schedule);

  const auto t0 = std::chrono::steady_clock::now();
  RunResult res = run(problem, stream, rc);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  out.model = res.smoothing.w_bar;
  out.steps = schedule.size();
  out.train_accuracy = accuracy(out.model, train);
  if (cfg.data.test) {
    const DatasetFile test_file = read_libsvm_file(*cfg.data.test);
    out.test_accuracy = accuracy(out.model, test_file.dense(M));
  }
  return out;
}

int cmd_svm_train(const ExperimentConfig& cfg, std::ostream& os) {
  if (cfg.kind != ProblemKind::Svm) throw ConfigError("problem.type", "svm-train needs problem.type = svm");
  const SvmTrainOutcome r = run_svm_train(cfg);
  ensure_directory(cfg.output_dir);
  {
    auto model = open_output(cfg.output_dir / "model.txt");
    model << "dimension " << r.model.size() << '\n';
    std::array<char, 32> buf{};
    for (Eigen::Index j = 0; j < r.model.size(); ++j) {
      const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), r.model[j]);
      model.write(buf.data(), end - buf.data());
      model << '\n';
    }
    finish_output(model, cfg.output_dir / "model.txt");
  }
  std::string s;
  s += fmt::format("rho = {:.17g}\nmu = {:.17g}\nkappa = {:.17g}\nepochs = {}\nsteps = {}\n", cfg.svm.rho, cfg.run.mu,
                   r.kappa, cfg.run.epochs, r.steps);
  s += fmt::format("train_accuracy = {:.6f}\n", r.train_accuracy);
  if (r.test_accuracy) s += fmt::format("test_accuracy = {:.6f}\n", *r.test_accuracy);
  s += fmt::format("seconds = {:.3f}\n", r.seconds);
  s += "# model is the smoothed iterate; subgradient sign: rho*w - gamma*h when gamma*h'w <= 1\n";
  {
    auto txt = open_output(cfg.output_dir / "summary.txt");
    txt << s;
    finish_output(txt, cfg.output_dir / "summary.txt");
  }
  os << s;
  return kSuccess;
}

}  // namespace subgrad::cli
