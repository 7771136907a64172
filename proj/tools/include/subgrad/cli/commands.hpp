#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subgrad/cli/config.hpp"
#include "subgrad/engine.hpp"
#include "subgrad/image.hpp"
#include "subgrad/theory.hpp"

namespace subgrad::cli {

enum ExitCode : int {
  kSuccess = 0,
  kPropertyFailure = 1,
  kUsageError = 2,
  kIoError = 3,
};

/// Command-line overrides applied on top of the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> out;
};

void apply(const Overrides& o, ExperimentConfig& cfg);

/// Maps an exception escaping a command to its exit code.
int exit_code_for(const std::exception& e);

// --- run ---------------------------------------------------------------------

struct ExperimentResult {
  ProblemConstants constants;
  double alpha = 0.0;
  double kappa = 0.0;
  double mu_max = 0.0;
  SteadyStateBounds steady;
  double msd0 = 0.0;
  ReplicationSummary curves;
  std::vector<double> bound;  // finite-horizon bound per record; NaN when alpha >= 1
  std::optional<double> fitted_alpha;
  /// Problem-specific values reported in the summary (a estimate, SVM bound, ...).
  std::map<std::string, double> extra;
  std::vector<std::string> notes;
};

/// Runs the replications of a LASSO or SVM experiment and averages them.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

void write_curves_csv(const ExperimentResult& r, std::ostream& out);
std::string format_summary(const ExperimentConfig& cfg, const ExperimentResult& r);

/// Writes curves.csv and summary.txt into cfg.output_dir.
int cmd_run(const ExperimentConfig& cfg, std::ostream& out);

// --- denoise -----------------------------------------------------------------

struct DenoiseOutcome {
  std::optional<GrayImage> clean;
  GrayImage noisy;
  GrayImage denoised;
  double kappa = 0.0;
  std::optional<double> psnr_noisy;
  std::optional<double> psnr_denoised;
  double seconds = 0.0;
};

/// Loads or synthesizes the input image, adds noise when a clean image is
/// given, and runs smoothed TV denoising.
DenoiseOutcome run_denoise(const ExperimentConfig& cfg);

/// Writes denoised.pgm (and noisy.pgm) into cfg.output_dir and prints PSNR.
int cmd_denoise(const ExperimentConfig& cfg, std::ostream& out);

// --- verify ------------------------------------------------------------------

struct CheckOutcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckOutcome> run_verification(const ExperimentConfig& cfg);

/// Prints one line per check; returns kPropertyFailure if any check fails.
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);

// --- svm-train ---------------------------------------------------------------

struct SvmTrainOutcome {
  Vector model;  // smoothed iterate
  double kappa = 0.0;
  std::size_t steps = 0;
  double train_accuracy = 0.0;
  std::optional<double> test_accuracy;
  double seconds = 0.0;
};

SvmTrainOutcome run_svm_train(const ExperimentConfig& cfg);

/// Fraction of samples with sign(h'w) == gamma; a zero score counts as wrong.
double accuracy(const Vector& w, const std::vector<Sample>& samples);

/// Writes model.txt and summary.txt into cfg.output_dir.
int cmd_svm_train(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace subgrad::cli
