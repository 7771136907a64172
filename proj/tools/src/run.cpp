#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "internal.hpp"
#include "subgrad/cli/commands.hpp"
#include "subgrad/data.hpp"
#include "subgrad/problems.hpp"

namespace subgrad::cli {

namespace {

void fill_bounds(ExperimentResult& r, double mu) {
  r.alpha = rate_alpha(mu, r.constants);
  r.mu_max = step_size_ceiling(r.constants);
  r.steady = steady_state_bounds(mu, r.constants);
  const auto& its = r.curves.mean.iterations;
  r.bound.assign(its.size(), std::numeric_limits<double>::quiet_NaN());
  if (r.alpha < 1.0) {
    for (std::size_t k = 0; k < its.size(); ++k) r.bound[k] = finite_horizon_bound(mu, r.constants, its[k], r.msd0);
  } else {
    r.notes.push_back(fmt::format("alpha = {:.10g} >= 1 (mu = {:.6g} above eta/(e^2+beta^2) = {:.6g}); "
                                  "finite-horizon bound column left as nan",
                                  r.alpha, mu, r.mu_max));
  }
}

void fit(ExperimentResult& r) {
  if (!r.curves.mean.has_risk()) return;
  try {
    r.fitted_alpha = fit_rate(r.curves.mean, r.steady.excess_risk);
  } catch (const InsufficientData& e) {
    r.notes.push_back(std::string("rate fit skipped: ") + e.what());
  }
}

ExperimentResult run_lasso(const ExperimentConfig& cfg) {
  const auto& l = cfg.lasso;
  const LassoProblem p = make_lasso_problem(l);
  const RiskOracle oracle = lasso_risk_oracle(p);

  Rng a_rng(derive_seed(cfg.run.seed, "lasso-a"));
  const Estimate a = estimate_lasso_a(p, l.a_samples, a_rng);

  ExperimentResult r;
  r.constants = lasso_constants(p, a.mean);
  r.msd0 = oracle.w_star.squaredNorm();
  r.extra["a_estimate"] = a.mean;
  r.extra["a_stderr"] = a.standard_error;
  r.extra["lambda_min"] = p.min_eigenvalue();

  const double alpha = rate_alpha(cfg.run.mu, r.constants);
  RunOptions opts;
  opts.oracle = &oracle;
  opts.theoretical_alpha = alpha;
  const RunConfig rc = to_run_config(cfg.run);
  r.kappa = resolve_kappa(rc.kappa, alpha);

  RegressionSpec spec{p.w_true(), p.R_h(), p.sigma_n2()};
  auto results = run_replications(
      p, [&](std::uint64_t seed) { return RegressionStream(spec, seed); }, rc, opts, cfg.run.workers);
  std::vector<Trajectory> trajs;
  trajs.reserve(results.size());
  for (auto& res : results) trajs.push_back(std::move(res.trajectory));
  if (rc.iterations >= rc.record_stride) r.curves = average_trajectories(trajs);
  r.curves.replications = trajs.size();

  fill_bounds(r, cfg.run.mu);
  fit(r);
  return r;
}

ExperimentResult run_svm(const ExperimentConfig& cfg) {
  const std::vector<Sample> frozen = load_svm_samples(cfg, cfg.data.frozen_samples);
  const SvmProblem problem(cfg.svm.rho, static_cast<std::size_t>(frozen.front().h.size()));
  const SvmEmpiricalRisk emp(cfg.svm.rho, frozen);
  const SvmOracleResult best = svm_empirical_minimizer(emp, cfg.data.oracle_iterations);
  const RiskOracle oracle{[&emp](const Iterate& w) { return emp.risk(w); }, best.w_star, best.risk_star};

  ExperimentResult r;
  r.constants = svm_constants(cfg.svm.rho, emp.trace_second_moment());
  r.msd0 = best.w_star.squaredNorm();
  const auto tight = svm_tight_bound(cfg.run.mu, cfg.svm.rho, best.w_star.squaredNorm(), emp.trace_second_moment());
  r.extra["trace_Rh"] = emp.trace_second_moment();
  r.extra["w_star_norm2"] = best.w_star.squaredNorm();
  r.extra["risk_star"] = best.risk_star;
  r.extra["svm_tight_bound"] = tight.bound;
  r.extra["svm_tight_alpha"] = tight.alpha;
  r.notes.push_back("subgradient sign: rho*w - gamma*h when gamma*h'w <= 1");
  r.notes.push_back(fmt::format("samples drawn uniformly from a frozen set of {}; risk is the empirical risk",
                                frozen.size()));

  const double alpha = rate_alpha(cfg.run.mu, r.constants);
  RunOptions opts;
  opts.oracle = &oracle;
  opts.theoretical_alpha = alpha;
  const RunConfig rc = to_run_config(cfg.run);
  r.kappa = resolve_kappa(rc.kappa, alpha);

  auto results = run_replications(
      problem, [&](std::uint64_t seed) { return DatasetStream(frozen, seed); }, rc, opts, cfg.run.workers);
  std::vector<Trajectory> trajs;
  for (auto& res : results) trajs.push_back(std::move(res.trajectory));
  if (rc.iterations >= rc.record_stride) r.curves = average_trajectories(trajs);
  r.curves.replications = trajs.size();

  fill_bounds(r, cfg.run.mu);
  fit(r);
  return r;
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.10e}", v);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ProblemKind::Lasso: return run_lasso(cfg);
    case ProblemKind::Svm: return run_svm(cfg);
    case ProblemKind::Tv: break;
  }
  throw ConfigError("problem.type", "tv experiments run through the denoise subcommand");
}

void write_curves_csv(const ExperimentResult& r, std::ostream& out) {
  out << "iteration,excess_risk_raw,excess_risk_smoothed,msd,bound\n";
  const auto& m = r.curves.mean;
  for (std::size_t k = 0; k < m.size(); ++k) {
    out << m.iterations[k] << ',' << num(m.excess_risk[k]) << ',' << num(m.smoothed_excess_risk[k]) << ','
        << num(m.msd[k]) << ',' << num(r.bound[k]) << '\n';
  }
}

std::string format_summary(const ExperimentConfig& cfg, const ExperimentResult& r) {
  std::string s;
  auto line = [&s](std::string_view key, const std::string& value) { s += fmt::format("{} = {}\n", key, value); };
  auto real = [](double v) { return fmt::format("{:.17g}", v); };

  line("problem", std::string(to_string(cfg.kind)));
  line("mu", real(cfg.run.mu));
  line("kappa", real(r.kappa));
  line("kappa_mode", cfg.run.kappa ? "explicit" : "auto");
  line("iterations", std::to_string(cfg.run.iterations));
  line("record_stride", std::to_string(cfg.run.record_stride));
  line("replications", std::to_string(cfg.run.replications));
  line("seed", std::to_string(cfg.run.seed));
  for (const auto& [k, v] : to_key_values(r.constants)) line(k, real(v));
  line("alpha", real(r.alpha));
  line("mu_max", real(r.mu_max));
  line("steady_state_excess_risk", real(r.steady.excess_risk));
  line("steady_state_msd", real(r.steady.msd));
  line("msd0", real(r.msd0));
  line("fitted_alpha", r.fitted_alpha ? real(*r.fitted_alpha) : "n/a");
  for (const auto& [k, v] : r.extra) line(k, real(v));
  const auto& m = r.curves.mean;
  if (m.size() > 0) {
    line("final_iteration", std::to_string(m.iterations.back()));
    line("final_excess_risk_raw", real(m.excess_risk.back()));
    line("final_excess_risk_smoothed", real(m.smoothed_excess_risk.back()));
    line("final_excess_risk_smoothed_stderr", real(r.curves.smoothed_excess_risk_stderr.back()));
    line("final_msd", real(m.msd.back()));
  }
  for (const auto& n : r.notes) s += "# " + n + "\n";
  return s;
}

int cmd_run(const ExperimentConfig& cfg, std::ostream& out) {
  const ExperimentResult r = run_experiment(cfg);
  ensure_directory(cfg.output_dir);
  {
    std::ofstream csv = open_output(cfg.output_dir / "curves.csv");
    write_curves_csv(r, csv);
    finish_output(csv, cfg.output_dir / "curves.csv");
  }
  const std::string summary = format_summary(cfg, r);
  {
    std::ofstream txt = open_output(cfg.output_dir / "summary.txt");
    txt << summary;
    finish_output(txt, cfg.output_dir / "summary.txt");
  }
  out << summary;
  return kSuccess;
}

}  // namespace subgrad::cli
