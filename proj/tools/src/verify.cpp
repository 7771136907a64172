#include <ostream>

#include <fmt/format.h>

#include "internal.hpp"
#include "subgrad/cli/commands.hpp"

namespace subgrad::cli {

namespace {

struct Target {
  std::size_t dimension = 0;
  SubgradientFn truth;
  InstantaneousFn instantaneous;
  RiskFn risk;
  SampleSource draw;
  Iterate w_star;
  double eta = 0.0;
  ProblemConstants constants;
  std::string label;
};

void add_structural_checks(const Target& t, const VerifySection& v, Rng& rng, std::vector<CheckOutcome>& out) {
  const double d = v.d_scale * t.constants.d;
  for (double scale : v.scales) {
    const auto n = verify_subgradient_inequality(t.risk, t.truth, t.dimension, v.pairs, scale, rng);
    out.push_back({fmt::format("subgradient_inequality[scale={:g}]", scale), n == 0,
                   fmt::format("{} of {} pairs violate J(w) >= J(w0) + g(w0)'(w - w0) (slack 1e-9)", n, v.pairs)});
  }
  for (double scale : v.scales) {
    const auto n = verify_affine_lipschitz(t.truth, t.dimension, v.pairs, t.constants.c, d, scale, rng);
    out.push_back({fmt::format("affine_lipschitz[scale={:g}]", scale), n == 0,
                   fmt::format("{} of {} pairs exceed c|w1-w2| + d with c = {:.6g}, d = {:.6g} (slack 1e-9)", n,
                               v.pairs, t.constants.c, d)});
  }
  for (double scale : v.scales) {
    const auto n = verify_strong_monotonicity(t.truth, t.w_star, t.eta, v.pairs, scale, rng);
    out.push_back({fmt::format("strong_monotonicity[scale={:g}]", scale), n == 0,
                   fmt::format("{} of {} points have |g(w)| < eta|w - w*| with eta = {:.6g} (slack 1e-9)", n, v.pairs,
                               t.eta)});
  }
}

void add_noise_checks(const Target& t, const VerifySection& v, Rng& rng, std::vector<CheckOutcome>& out) {
  const double z_max = familywise_z_threshold(v.probes * t.dimension);
  for (std::size_t k = 0; k < v.probes; ++k) {
    Iterate w = t.w_star;
    if (k > 0) {
      Vector e(static_cast<Eigen::Index>(t.dimension));
      rng.fill_normal(e);
      w += v.probe_scale * static_cast<double>(k) * e;
    }
    const auto rep = verify_noise_moments(t.instantaneous, t.truth, t.draw, w, t.w_star, t.constants.beta2,
                                          t.constants.sigma2, v.noise_samples);
    out.push_back({fmt::format("noise_zero_mean[probe={}]", k), rep.max_mean_z <= z_max,
                   fmt::format("max |mean|/stderr = {:.3f} over {} components, threshold {:.3f} "
                               "(family-wise 3-sigma over {} tests)",
                               rep.max_mean_z, t.dimension, z_max, v.probes * t.dimension)});
    const double limit = rep.bound + 3.0 * rep.second_moment_stderr;
    out.push_back({fmt::format("noise_variance[probe={}]", k), rep.second_moment <= limit,
                   fmt::format("E|s|^2 = {:.6g} +/- {:.3g}, bound beta2|w*-w|^2 + sigma2 = {:.6g}", rep.second_moment,
                               rep.second_moment_stderr, rep.bound)});
  }
}

}  // namespace

std::vector<CheckOutcome> run_verification(const ExperimentConfig& cfg) {
  const auto& v = cfg.verify;
  Rng rng(derive_seed(cfg.run.seed, "verify"));
  std::vector<CheckOutcome> out;

  if (cfg.kind == ProblemKind::Lasso) {
    const LassoProblem p = make_lasso_problem(cfg.lasso);
    Rng a_rng(derive_seed(cfg.run.seed, "lasso-a"));
    const Estimate a = estimate_lasso_a(p, cfg.lasso.a_samples, a_rng);
    RegressionStream stream(RegressionSpec{p.w_true(), p.R_h(), p.sigma_n2()}, derive_seed(cfg.run.seed, "noise"));
    Target t;
    t.dimension = p.dimension();
    t.truth = [&p](const Iterate& w) { return lasso_true_subgradient(p, w); };
    t.instantaneous = [&p](const Iterate& w, const Sample& s) { return lasso_instantaneous_subgradient(p, w, s); };
    t.risk = [&p](const Iterate& w) { return lasso_risk_closed_form(p, w); };
    t.draw = [&stream] { return *stream.next(); };
    t.w_star = lasso_optimum(p);
    t.eta = p.min_eigenvalue();
    t.constants = lasso_constants(p, a.mean);
    add_structural_checks(t, v, rng, out);
    add_noise_checks(t, v, rng, out);
    return out;
  }

  if (cfg.kind == ProblemKind::Svm) {
    const std::vector<Sample> frozen = load_svm_samples(cfg, v.frozen_samples);
    const SvmProblem p(cfg.svm.rho, static_cast<std::size_t>(frozen.front().h.size()));
    const SvmEmpiricalRisk emp(cfg.svm.rho, frozen);
    const SvmOracleResult best = svm_empirical_minimizer(emp, v.oracle_iterations);
    DatasetStream stream(frozen, derive_seed(cfg.run.seed, "noise"));
    Target t;
    t.dimension = p.dimension();
    t.truth = [&emp](const Iterate& w) { return emp.subgradient(w); };
    t.instantaneous = [&p](const Iterate& w, const Sample& s) { return svm_instantaneous_subgradient(p, w, s); };
    t.risk = [&emp](const Iterate& w) { return emp.risk(w); };
    t.draw = [&stream] { return *stream.next(); };
    t.w_star = best.w_star;
    t.eta = cfg.svm.rho;
    t.constants = svm_constants(cfg.svm.rho, emp.trace_second_moment());
    add_structural_checks(t, v, rng, out);
    add_noise_checks(t, v, rng, out);
    return out;
  }

  throw ConfigError("problem.type", "verify supports lasso and svm");
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& os) {
  const auto checks = run_verification(cfg);
  bool all = true;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.pass;
  }
  os << (all ? "all checks passed\n" : "some checks failed\n");
  return all ? kSuccess : kPropertyFailure;
}

}  // namespace subgrad::cli
