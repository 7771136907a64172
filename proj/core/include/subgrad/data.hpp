#pragma once

// Sample sources, LIBSVM datasets and grayscale image I/O.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "subgrad/error.hpp"
#include "subgrad/image.hpp"
#include "subgrad/random.hpp"
#include "subgrad/types.hpp"

namespace subgrad {

// ---------------------------------------------------------------------------
// Stream specifications

/// gamma = h'w_true + n with h ~ N(0, R_h) and n ~ N(0, sigma_n2).
struct RegressionSpec {
  Vector w_true;
  Matrix R_h;
  double sigma_n2 = 0.0;
};

/// Two Gaussian classes: gamma = +1 with probability prior_pos, then
/// h ~ N(mean_gamma, cov_gamma).
struct SvmGaussianSpec {
  Vector mean_pos, mean_neg;
  Matrix cov_pos, cov_neg;
  double prior_pos = 0.5;
  double prior_neg = 0.5;
};

struct FileSpec {
  std::filesystem::path path;
};

struct StreamSpec {
  std::variant<RegressionSpec, SvmGaussianSpec, FileSpec> kind;
  std::uint64_t seed = 0;
};

/// Matrix F with F F' = cov, for symmetric positive semidefinite cov.
/// Throws InvalidArgument for asymmetric or indefinite input.
Matrix covariance_factor(const Matrix& cov);

Sample gen_regression_sample(const RegressionSpec& spec, const Matrix& factor, Rng& rng);
Sample gen_svm_sample(const SvmGaussianSpec& spec, const Matrix& factor_pos, const Matrix& factor_neg, Rng& rng);

/// Endless regression stream. Same spec and seed give the same sequence.
class RegressionStream {
 public:
  RegressionStream(RegressionSpec spec, std::uint64_t seed);
  std::optional<Sample> next();
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(spec_.w_true.size()); }

 private:
  RegressionSpec spec_;
  Matrix factor_;
  bool identity_ = false;
  Rng rng_;
};

/// Endless two-class Gaussian stream.
class SvmGaussianStream {
 public:
  SvmGaussianStream(SvmGaussianSpec spec, std::uint64_t seed);
  std::optional<Sample> next();
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(spec_.mean_pos.size()); }

 private:
  SvmGaussianSpec spec_;
  Matrix factor_pos_, factor_neg_;
  Rng rng_;
};

// ---------------------------------------------------------------------------
// LIBSVM datasets

struct SparseRecord {
  double label = 0.0;
  std::vector<std::pair<std::size_t, double>> features;  // 1-based, strictly increasing
};

/// Parsed LIBSVM file. `dimension` is the largest feature index seen.
struct DatasetFile {
  std::vector<SparseRecord> records;
  std::size_t dimension = 0;

  std::size_t size() const noexcept { return records.size(); }

  /// Dense samples of length `dim` (default: `dimension`). Features with an
  /// index above `dim` are dropped.
  std::vector<Sample> dense(std::optional<std::size_t> dim = std::nullopt) const;
};

enum class LabelMode {
  /// Labels must be -1, 0 or +1; 0 maps to -1.
  Binary,
  /// Labels are kept as real values (regression files).
  Real,
};

/// Grammar per line: label (index:value)*, whitespace separated, 1-based
/// strictly increasing indices. Blank lines are skipped. Errors throw
/// ParseError carrying the 1-based line number.
DatasetFile parse_libsvm(std::string_view text, LabelMode mode = LabelMode::Binary);

/// Inverse of parse_libsvm: shortest round-trip decimal for every number.
std::string serialize_libsvm(const DatasetFile& data);

/// Throws IoError if the file cannot be read.
DatasetFile read_libsvm_file(const std::filesystem::path& path, LabelMode mode = LabelMode::Binary);

/// Uniform sampling with replacement from a fixed sample set.
class DatasetStream {
 public:
  DatasetStream(const std::vector<Sample>& samples, std::uint64_t seed);
  std::optional<Sample> next();

 private:
  const std::vector<Sample>* samples_;
  Rng rng_;
};

/// One ordered pass over a sample set; exhausts at the end.
class SequentialStream {
 public:
  explicit SequentialStream(const std::vector<Sample>& samples) : samples_(&samples) {}
  std::optional<Sample> next();

 private:
  const std::vector<Sample>* samples_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Images

/// Adds i.i.d. N(0, sigma^2) noise to every pixel. No clipping.
GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed);

/// 10 log10(peak^2 / MSE) with the peak of `reference`. +infinity for
/// identical images.
double psnr(const GrayImage& img, const GrayImage& reference);

/// Binary P5 PGM with maxval 255, read as reals with peak 255.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage decode_pgm(std::string_view bytes);

/// Scales to 8 bits by 255/peak, clamps to [0, 255], rounds half up.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
std::string encode_pgm(const GrayImage& img);

/// Deterministic test pattern with values in [0, 1] (peak 1): a few flat
/// rectangles and a disc on a dark background.
GrayImage make_piecewise_constant_image(std::size_t rows, std::size_t cols);

}  // namespace subgrad
