#pragma once

// Constant step-size stochastic subgradient loop with exponential smoothing.
//
//   w_i   = w_{i-1} - mu * g_hat(w_{i-1})
//   S_i   = kappa * S_{i-1} + 1
//   wb_i  = (1 - 1/S_i) * wb_{i-1} + (1/S_i) * w_i
//
// starting from S_0 = 1 and wb_0 = w_0. The smoothed iterate wb_L is the
// kappa-geometric average sum_j kappa^(L-j) w_j / S_L of every iterate seen.

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "subgrad/error.hpp"
#include "subgrad/types.hpp"

namespace subgrad {

/// Returns w - mu * g_hat.
Iterate sgd_step(const Iterate& w, const Vector& g_hat, double mu);

/// In-place form of sgd_step used by the run loop.
void sgd_step_in_place(Iterate& w, const Vector& g_hat, double mu);

struct SmoothingState {
  double kappa = 0.0;
  double S = 1.0;
  Iterate w_bar;

  /// S = 1, w_bar = w0. Throws InvalidArgument unless 0 <= kappa < 1.
  static SmoothingState start(const Iterate& w0, double kappa);

  void absorb(const Iterate& w);
};

/// S <- kappa*S + 1, w_bar <- (1 - 1/S) w_bar + (1/S) w.
SmoothingState smoothing_update(SmoothingState state, const Iterate& w);

/// sum_j kappa^(L-j) w_j / sum_j kappa^(L-j) over iterates w_0..w_L.
Iterate weighted_average_direct(std::span<const Iterate> iterates, double kappa);

/// Closed form of S after `updates` smoothing updates: (1 - kappa^(L+1)) / (1 - kappa).
double geometric_sum(double kappa, std::size_t updates);

/// Best iterate seen so far together with its (estimated) mean risk.
struct Pocket {
  Iterate w;
  double risk = 0.0;
};

/// Keeps the lower-risk of `best` and `candidate`; ties keep `best`.
Pocket pocket_update(Pocket best, const Iterate& candidate, double risk_estimate);

/// Risk evaluator with the known minimizer, for excess-risk and MSD curves.
/// `risk` must be safe to call concurrently.
struct RiskOracle {
  std::function<double(const Iterate&)> risk;
  Iterate w_star;
  double risk_star = 0.0;
};

struct RunConfig {
  double mu = 0.0;
  /// Smoothing factor; std::nullopt selects the theoretical rate alpha.
  std::optional<double> kappa;
  std::size_t iterations = 0;
  std::size_t record_stride = 100;
  std::uint64_t seed = 0;
  std::size_t replications = 1;

  void validate() const;
};

/// Explicit kappa is checked against [0, 1). Automatic kappa takes alpha and
/// requires alpha in (0, 1): a larger alpha means mu is above eta/(e^2+beta^2).
double resolve_kappa(std::optional<double> requested, std::optional<double> theoretical_alpha);

/// Per-record curves. Entry k describes the state after iterations[k] steps.
/// Values are stored unclamped; tiny negatives from risk-oracle noise are
/// expected and only clamped when reported.
struct Trajectory {
  std::size_t iteration_stride = 1;
  std::vector<std::size_t> iterations;
  std::vector<double> excess_risk;           // J(w_i) - J(w*)
  std::vector<double> smoothed_excess_risk;  // J(wb_i) - J(w*)
  std::vector<double> msd;                   // |w* - w_i|^2
  std::vector<double> smoothed_msd;          // |w* - wb_i|^2
  std::vector<double> pocket_excess_risk;    // only with pocket tracking
  // Filled instead of the risk curves when no oracle is available.
  std::vector<Iterate> raw_iterates;
  std::vector<Iterate> smoothed_iterates;

  std::size_t size() const noexcept { return iterations.size(); }
  bool has_risk() const noexcept { return !excess_risk.empty(); }
};

struct RunOptions {
  /// Starting point; zeros when absent.
  std::optional<Iterate> initial;
  const RiskOracle* oracle = nullptr;
  bool track_pocket = false;
  /// Used when RunConfig::kappa is automatic.
  std::optional<double> theoretical_alpha;
};

struct RunResult {
  Iterate w;
  SmoothingState smoothing;
  Trajectory trajectory;
  std::optional<Pocket> pocket;
};

template <class P>
concept SubgradientProblem = requires(const P& p, const Iterate& w, const Sample& s) {
  { p.dimension() } -> std::convertible_to<std::size_t>;
  { p.instantaneous_subgradient(w, s) } -> std::convertible_to<Vector>;
};

template <class S>
concept SampleStream = requires(S& s) {
  { s.next() } -> std::same_as<std::optional<Sample>>;
};

namespace detail {
void record(Trajectory& traj, std::size_t iteration, const Iterate& w, const SmoothingState& smooth,
            const RiskOracle* oracle, std::optional<Pocket>& pocket, bool track_pocket);
}

/// Runs config.iterations steps of the smoothed stochastic subgradient
/// recursion. Records every config.record_stride iterations (i >= 1).
/// Throws StreamExhausted if the stream ends early.
template <SubgradientProblem P, SampleStream S>
RunResult run(const P& problem, S& stream, const RunConfig& config, const RunOptions& options = {}) {
  config.validate();
  const double kappa = resolve_kappa(config.kappa, options.theoretical_alpha);
  const auto dim = static_cast<Eigen::Index>(problem.dimension());

  Iterate w = options.initial ? *options.initial : Iterate::Zero(dim);
  if (w.size() != dim) throw InvalidArgument("initial iterate has wrong dimension");
  if (options.track_pocket && options.oracle == nullptr)
    throw InvalidArgument("pocket tracking requires a risk oracle");

  RunResult result{w, SmoothingState::start(w, kappa), {}, std::nullopt};
  result.trajectory.iteration_stride = config.record_stride;
  if (options.track_pocket) {
    const double r0 = options.oracle->risk(w);
    result.pocket = Pocket{w, r0};
  }

  Iterate& cur = result.w;
  for (std::size_t i = 1; i <= config.iterations; ++i) {
    std::optional<Sample> sample = stream.next();
    if (!sample) {
      throw StreamExhausted("sample stream exhausted after " + std::to_string(i - 1) + " of " +
                            std::to_string(config.iterations) + " iterations");
    }
    const Vector g = problem.instantaneous_subgradient(cur, *sample);
    sgd_step_in_place(cur, g, config.mu);
    result.smoothing.absorb(cur);
    if (i % config.record_stride == 0) {
      detail::record(result.trajectory, i, cur, result.smoothing, options.oracle, result.pocket,
                     options.track_pocket);
    }
  }
  return result;
}

/// Runs config.replications independent runs. Replication r draws from
/// make_stream(config.seed + r); up to `workers` replications run at once.
/// Results are ordered by replication index and do not depend on `workers`.
template <SubgradientProblem P, class StreamFactory>
std::vector<RunResult> run_replications(const P& problem, StreamFactory&& make_stream,
                                        const RunConfig& config, const RunOptions& options = {},
                                        std::size_t workers = 1) {
  config.validate();
  std::vector<std::optional<RunResult>> slots(config.replications);
  std::vector<std::exception_ptr> errors(config.replications);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t r = next++; r < config.replications; r = next++) {
      try {
        auto stream = make_stream(config.seed + r);
        slots[r] = run(problem, stream, config, options);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };

  const std::size_t n = std::clamp<std::size_t>(workers, 1, config.replications);
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<RunResult> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Arithmetic mean across replications at matched record points, plus the
/// standard error of each mean.
struct ReplicationSummary {
  Trajectory mean;
  std::vector<double> excess_risk_stderr;
  std::vector<double> smoothed_excess_risk_stderr;
  std::size_t replications = 0;
};

ReplicationSummary average_trajectories(std::span<const Trajectory> runs);

}  // namespace subgrad
