#pragma once

// INI experiment configuration. Sections and keys are documented in README.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subgrad/error.hpp"

namespace subgrad::cli {

/// Invalid or unknown configuration key. The message names the key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what) : Error(key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

enum class ProblemKind { Lasso, Svm, Tv };

struct LassoSection {
  double delta = 0.002;
  std::size_t dimension = 100;
  /// 1-based (index, value) pairs; every other entry of w_true is zero.
  std::vector<std::pair<std::size_t, double>> w_nonzero{{1, 1.0}, {2, -1.0}};
  double rh_scale = 1.0;  // R_h = rh_scale * I
  double sigma_n2 = 0.01;
  std::size_t a_samples = 100000;
};

struct SvmSection {
  double rho = 0.01;
};

struct TvSection {
  double lambda = 0.08;
};

struct RunSection {
  double mu = 0.0;
  std::optional<double> kappa;  // unset: theoretical rate
  std::size_t iterations = 0;
  std::size_t record_stride = 100;
  std::uint64_t seed = 1;
  std::size_t replications = 1;
  std::size_t workers = 1;
  std::size_t epochs = 1;
};

struct DataSection {
  // Two-class Gaussian source: means +/-mean*1, covariance variance*I.
  std::size_t dimension = 4;
  double mean = 0.5;
  double variance = 1.0;
  double prior_pos = 0.5;
  std::size_t frozen_samples = 100000;
  std::size_t oracle_iterations = 100000;
  // LIBSVM files.
  std::optional<std::filesystem::path> train;
  std::optional<std::filesystem::path> test;
  // Images. `image` is a clean reference; `noisy` skips noise injection.
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> noisy;
  double sigma = 0.1;
  bool normalize = true;
  std::size_t rows = 64;
  std::size_t cols = 64;
};

struct VerifySection {
  std::size_t pairs = 10000;
  std::size_t probes = 5;
  std::size_t noise_samples = 100000;
  std::size_t frozen_samples = 10000;
  std::size_t oracle_iterations = 20000;
  double probe_scale = 0.1;
  double d_scale = 1.0;
  std::vector<double> scales{1e-5, 1e-3, 1.0};
};

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::Lasso;
  LassoSection lasso;
  SvmSection svm;
  TvSection tv;
  RunSection run;
  DataSection data;
  VerifySection verify;
  std::filesystem::path output_dir = "out";
};

/// Defaults for a problem kind, including its run parameters.
ExperimentConfig default_config(ProblemKind kind);

/// Parses INI text. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::string_view text);

/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view to_string(ProblemKind kind);

}  // namespace subgrad::cli
