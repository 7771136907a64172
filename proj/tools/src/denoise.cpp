#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "internal.hpp"
#include "subgrad/cli/commands.hpp"

namespace subgrad::cli {

namespace {

GrayImage load_image(const std::filesystem::path& path, bool normalize) {
  GrayImage img = read_pgm(path);
  if (normalize) {
    img.pixels /= 255.0;
    img.peak = 1.0;
  }
  return img;
}

std::string db(double v) { return std::isinf(v) ? "inf" : fmt::format("{:.4f}", v); }

}  // namespace

DenoiseOutcome run_denoise(const ExperimentConfig& cfg) {
  const auto& d = cfg.data;
  if (d.image && d.noisy) throw ConfigError("data.noisy", "give either data.image or data.noisy, not both");

  DenoiseOutcome out;
  if (d.noisy) {
    out.noisy = load_image(*d.noisy, d.normalize);
  } else {
    out.clean = d.image ? load_image(*d.image, d.normalize) : make_piecewise_constant_image(d.rows, d.cols);
    out.noisy = add_gaussian_noise(*out.clean, d.sigma, derive_seed(cfg.run.seed, "image-noise"));
  }

  // eta = 1 and e^2 = 2 for the fidelity term, beta^2 = 0.
  const double mu = cfg.run.mu;
  out.kappa = cfg.run.kappa ? *cfg.run.kappa : resolve_kappa(std::nullopt, 1.0 - mu + 2.0 * mu * mu);

  const auto t0 = std::chrono::steady_clock::now();
  auto res = tv_denoise(out.noisy, cfg.tv.lambda, mu, cfg.run.iterations, out.kappa);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.denoised = std::move(res.smoothed);

  if (out.clean) {
    out.psnr_noisy = psnr(out.noisy, *out.clean);
    out.psnr_denoised = psnr(out.denoised, *out.clean);
  }
  return out;
}

int cmd_denoise(const ExperimentConfig& cfg, std::ostream& os) {
  if (cfg.kind != ProblemKind::Tv) throw ConfigError("problem.type", "denoise needs problem.type = tv");
  const DenoiseOutcome r = run_denoise(cfg);
  ensure_directory(cfg.output_dir);
  write_pgm(r.denoised, cfg.output_dir / "denoised.pgm");
  write_pgm(r.noisy, cfg.output_dir / "noisy.pgm");

  std::string s;
  s += fmt::format("lambda = {:.17g}\nmu = {:.17g}\nkappa = {:.17g}\niterations = {}\n", cfg.tv.lambda, cfg.run.mu,
                   r.kappa, cfg.run.iterations);
  s += fmt::format("peak = {:.17g}\n", r.denoised.peak);
  if (r.psnr_noisy) {
    s += fmt::format("psnr_noisy_db = {}\npsnr_denoised_db = {}\npsnr_gain_db = {}\n", db(*r.psnr_noisy),
                     db(*r.psnr_denoised), db(*r.psnr_denoised - *r.psnr_noisy));
  }
  s += fmt::format("seconds = {:.3f}\n", r.seconds);
  {
    auto txt = open_output(cfg.output_dir / "summary.txt");
    txt << s;
    finish_output(txt, cfg.output_dir / "summary.txt");
  }
  os << s;
  return kSuccess;
}

}  // namespace subgrad::cli
