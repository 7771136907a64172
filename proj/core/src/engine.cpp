#include "subgrad/engine.hpp"

#include <cmath>
#include <string>

namespace subgrad {

namespace {

void check_step_args(const Iterate& w, const Vector& g_hat, double mu) {
  if (w.size() != g_hat.size()) {
    throw InvalidArgument("subgradient has dimension " + std::to_string(g_hat.size()) +
                          ", iterate has " + std::to_string(w.size()));
  }
  if (!std::isfinite(mu)) throw NumericError("non-finite step size");
  if (!g_hat.allFinite()) throw NumericError("non-finite subgradient entry");
  if (!w.allFinite()) throw NumericError("non-finite iterate entry");
}

}  // namespace

Iterate sgd_step(const Iterate& w, const Vector& g_hat, double mu) {
  check_step_args(w, g_hat, mu);
  return w - mu * g_hat;
}

void sgd_step_in_place(Iterate& w, const Vector& g_hat, double mu) {
  check_step_args(w, g_hat, mu);
  w.noalias() -= mu * g_hat;
}

SmoothingState SmoothingState::start(const Iterate& w0, double kappa) {
  if (!(kappa >= 0.0 && kappa < 1.0)) {
    throw InvalidArgument("smoothing factor kappa must lie in [0, 1), got " + std::to_string(kappa));
  }
  return SmoothingState{kappa, 1.0, w0};
}

void SmoothingState::absorb(const Iterate& w) {
  if (w.size() != w_bar.size()) throw InvalidArgument("iterate dimension changed during smoothing");
  S = kappa * S + 1.0;
  const double step = 1.0 / S;
  w_bar = (1.0 - step) * w_bar + step * w;
}

SmoothingState smoothing_update(SmoothingState state, const Iterate& w) {
  state.absorb(w);
  return state;
}

Iterate weighted_average_direct(std::span<const Iterate> iterates, double kappa) {
  if (iterates.empty()) throw InvalidArgument("weighted average of an empty sequence");
  if (!(kappa >= 0.0 && kappa < 1.0)) throw InvalidArgument("kappa must lie in [0, 1)");
  const std::size_t last = iterates.size() - 1;
  Iterate sum = Iterate::Zero(iterates.front().size());
  double norm = 0.0;
  // Newest first so the weight is a running power of kappa.
  double weight = 1.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const Iterate& w = iterates[last - k];
    if (w.size() != sum.size()) throw InvalidArgument("iterates differ in dimension");
    sum += weight * w;
    norm += weight;
    weight *= kappa;
  }
  return sum / norm;
}

double geometric_sum(double kappa, std::size_t updates) {
  return (1.0 - std::pow(kappa, static_cast<double>(updates) + 1.0)) / (1.0 - kappa);
}

Pocket pocket_update(Pocket best, const Iterate& candidate, double risk_estimate) {
  if (std::isnan(risk_estimate)) throw NumericError("NaN risk estimate for pocket candidate");
  if (risk_estimate < best.risk) return Pocket{candidate, risk_estimate};
  return best;
}

void RunConfig::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("step size mu must be positive");
  if (record_stride == 0) throw InvalidArgument("record_stride must be positive");
  if (replications == 0) throw InvalidArgument("replications must be positive");
  if (kappa && !(*kappa >= 0.0 && *kappa < 1.0)) throw InvalidArgument("kappa must lie in [0, 1)");
}

double resolve_kappa(std::optional<double> requested, std::optional<double> theoretical_alpha) {
  if (requested) {
    if (!(*requested >= 0.0 && *requested < 1.0)) throw InvalidArgument("kappa must lie in [0, 1)");
    return *requested;
  }
  if (!theoretical_alpha) {
    throw InvalidConfiguration("kappa=auto needs the problem's theoretical rate alpha");
  }
  const double alpha = *theoretical_alpha;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidConfiguration("kappa=auto resolved to alpha=" + std::to_string(alpha) +
                               ", outside (0, 1): the step size violates mu < eta/(e^2+beta^2)");
  }
  return alpha;
}

namespace detail {

void record(Trajectory& traj, std::size_t iteration, const Iterate& w, const SmoothingState& smooth,
            const RiskOracle* oracle, std::optional<Pocket>& pocket, bool track_pocket) {
  traj.iterations.push_back(iteration);
  if (oracle == nullptr) {
    traj.raw_iterates.push_back(w);
    traj.smoothed_iterates.push_back(smooth.w_bar);
    return;
  }
  const double raw = oracle->risk(w);
  traj.excess_risk.push_back(raw - oracle->risk_star);
  traj.smoothed_excess_risk.push_back(oracle->risk(smooth.w_bar) - oracle->risk_star);
  traj.msd.push_back((oracle->w_star - w).squaredNorm());
  traj.smoothed_msd.push_back((oracle->w_star - smooth.w_bar).squaredNorm());
  if (track_pocket && pocket) {
    pocket = pocket_update(std::move(*pocket), w, raw);
    traj.pocket_excess_risk.push_back(pocket->risk - oracle->risk_star);
  }
}

}  // namespace detail

namespace {

struct MeanAndError {
  std::vector<double> mean;
  std::vector<double> stderr_;
};

MeanAndError column_stats(std::span<const Trajectory> runs,
                          const std::vector<double> Trajectory::*field) {
  const std::size_t n = runs.size();
  const std::size_t len = (runs.front().*field).size();
  MeanAndError out{std::vector<double>(len, 0.0), std::vector<double>(len, 0.0)};
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (const auto& r : runs) sum += (r.*field)[k];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& r : runs) {
      const double d = (r.*field)[k] - mean;
      ss += d * d;
    }
    out.mean[k] = mean;
    out.stderr_[k] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  }
  return out;
}

}  // namespace

ReplicationSummary average_trajectories(std::span<const Trajectory> runs) {
  if (runs.empty()) throw InvalidArgument("no trajectories to average");
  const Trajectory& first = runs.front();
  for (const auto& r : runs) {
    if (r.iterations != first.iterations || r.excess_risk.size() != first.excess_risk.size() ||
        r.pocket_excess_risk.size() != first.pocket_excess_risk.size()) {
      throw InvalidArgument("trajectories are not recorded at matching iterations");
    }
  }

  ReplicationSummary out;
  out.replications = runs.size();
  out.mean.iteration_stride = first.iteration_stride;
  out.mean.iterations = first.iterations;

  auto raw = column_stats(runs, &Trajectory::excess_risk);
  auto smooth = column_stats(runs, &Trajectory::smoothed_excess_risk);
  out.mean.excess_risk = std::move(raw.mean);
  out.excess_risk_stderr = std::move(raw.stderr_);
  out.mean.smoothed_excess_risk = std::move(smooth.mean);
  out.smoothed_excess_risk_stderr = std::move(smooth.stderr_);
  out.mean.msd = column_stats(runs, &Trajectory::msd).mean;
  out.mean.smoothed_msd = column_stats(runs, &Trajectory::smoothed_msd).mean;
  out.mean.pocket_excess_risk = column_stats(runs, &Trajectory::pocket_excess_risk).mean;
  return out;
}

}  // namespace subgrad
