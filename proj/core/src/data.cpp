#include "subgrad/data.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "subgrad/error.hpp"

namespace subgrad {

Matrix covariance_factor(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw InvalidArgument("covariance must be square and nonempty");
  if (!cov.allFinite()) throw NumericError("covariance has non-finite entries");
  const double scale = 1.0 + cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("covariance must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() < -1e-10 * scale) throw InvalidArgument("covariance must be positive semidefinite");
  return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

Sample gen_regression_sample(const RegressionSpec& spec, const Matrix& factor, Rng& rng) {
  Vector z(spec.w_true.size());
  rng.fill_normal(z);
  Sample s;
  s.h = factor * z;
  s.gamma = s.h.dot(spec.w_true) + std::sqrt(spec.sigma_n2) * rng.normal();
  return s;
}

Sample gen_svm_sample(const SvmGaussianSpec& spec, const Matrix& factor_pos, const Matrix& factor_neg, Rng& rng) {
  Sample s;
  const bool positive = rng.uniform() < spec.prior_pos;
  s.gamma = positive ? 1.0 : -1.0;
  Vector z(spec.mean_pos.size());
  rng.fill_normal(z);
  s.h = positive ? Vector(spec.mean_pos + factor_pos * z) : Vector(spec.mean_neg + factor_neg * z);
  return s;
}

RegressionStream::RegressionStream(RegressionSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {
  const auto M = spec_.w_true.size();
  if (M == 0) throw InvalidArgument("regression dimension must be positive");
  if (spec_.R_h.rows() != M || spec_.R_h.cols() != M) throw InvalidArgument("R_h must match w_true");
  if (!(spec_.sigma_n2 >= 0.0)) throw InvalidArgument("noise variance must be nonnegative");
  identity_ = (spec_.R_h - Matrix::Identity(M, M)).cwiseAbs().maxCoeff() == 0.0;
  factor_ = identity_ ? Matrix::Identity(M, M) : covariance_factor(spec_.R_h);
}

std::optional<Sample> RegressionStream::next() {
  if (!identity_) return gen_regression_sample(spec_, factor_, rng_);
  // Same draws as the general path with factor = I, without the product.
  Sample s;
  s.h.resize(spec_.w_true.size());
  rng_.fill_normal(s.h);
  s.gamma = s.h.dot(spec_.w_true) + std::sqrt(spec_.sigma_n2) * rng_.normal();
  return s;
}

SvmGaussianStream::SvmGaussianStream(SvmGaussianSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), rng_(seed) {
  const auto M = spec_.mean_pos.size();
  if (M == 0 || spec_.mean_neg.size() != M) throw InvalidArgument("class means must share a positive dimension");
  if (!(spec_.prior_pos >= 0.0) || !(spec_.prior_neg >= 0.0) ||
      std::abs(spec_.prior_pos + spec_.prior_neg - 1.0) > 1e-12) {
    throw InvalidArgument("class priors must be nonnegative and sum to 1");
  }
  if (spec_.cov_pos.rows() != M || spec_.cov_neg.rows() != M) throw InvalidArgument("covariances must match means");
  factor_pos_ = covariance_factor(spec_.cov_pos);
  factor_neg_ = covariance_factor(spec_.cov_neg);
}

std::optional<Sample> SvmGaussianStream::next() { return gen_svm_sample(spec_, factor_pos_, factor_neg_, rng_); }

// --- images ------------------------------------------------------------------

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument("noise sigma must be nonnegative");
  GrayImage out = img;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  // Column-major walk; the order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < out.cols(); ++j)
    for (Eigen::Index i = 0; i < out.rows(); ++i) out.pixels(i, j) += sigma * rng.normal();
  return out;
}

double psnr(const GrayImage& img, const GrayImage& reference) {
  if (!img.same_shape(reference)) throw InvalidArgument("psnr: image shapes differ");
  const double mse = (img.pixels - reference.pixels).squaredNorm() / static_cast<double>(img.pixels.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(reference.peak * reference.peak / mse);
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string_view pgm_token(std::string_view bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char ch = bytes[pos];
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') ++pos;
  if (start == pos) throw FormatError("PGM header truncated");
  return bytes.substr(start, pos - start);
}

long pgm_number(std::string_view bytes, std::size_t& pos, const char* what) {
  const auto tok = pgm_token(bytes, pos);
  long value = 0;
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || end != tok.data() + tok.size() || value <= 0) {
    throw FormatError(std::string("PGM header has an invalid ") + what);
  }
  return value;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return std::move(buf).str();
}

}  // namespace

GrayImage decode_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes.substr(0, 2) != "P5") throw FormatError("not a binary PGM (P5) file");
  std::size_t pos = 2;
  const long cols = pgm_number(bytes, pos, "width");
  const long rows = pgm_number(bytes, pos, "height");
  const long maxval = pgm_number(bytes, pos, "maxval");
  if (maxval != 255) throw FormatError("unsupported PGM maxval " + std::to_string(maxval) + " (only 255)");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError("PGM header truncated");
  }
  ++pos;  // single whitespace before the raster
  const auto need = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (bytes.size() - pos < need) throw FormatError("PGM raster truncated");
  Matrix px(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      px(i, j) = static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i * cols + j)]);
  return GrayImage(std::move(px), 255.0);
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pgm(slurp(path)); }

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  const double scale = 255.0 / img.peak;
  out.reserve(out.size() + static_cast<std::size_t>(img.pixels.size()));
  for (Eigen::Index i = 0; i < img.rows(); ++i) {
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const double v = std::clamp(img.pixels(i, j) * scale, 0.0, 255.0);
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::floor(v + 0.5))));
    }
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  const std::string bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error writing " + path.string());
}

GrayImage make_piecewise_constant_image(std::size_t rows, std::size_t cols) {
  const auto r = static_cast<Eigen::Index>(rows), c = static_cast<Eigen::Index>(cols);
  Matrix px = Matrix::Constant(r, c, 0.1);
  auto fill = [&](double top, double left, double bottom, double right, double value) {
    for (Eigen::Index i = static_cast<Eigen::Index>(top * r); i < static_cast<Eigen::Index>(bottom * r); ++i)
      for (Eigen::Index j = static_cast<Eigen::Index>(left * c); j < static_cast<Eigen::Index>(right * c); ++j)
        px(i, j) = value;
  };
  fill(0.10, 0.10, 0.45, 0.55, 0.8);
  fill(0.55, 0.05, 0.90, 0.40, 0.5);
  fill(0.20, 0.65, 0.80, 0.90, 0.3);
  const double ci = 0.7 * r, cj = 0.6 * c, rad = 0.15 * std::min(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j)
      if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= rad * rad) px(i, j) = 0.95;
  return GrayImage(std::move(px), 1.0);
}

}  // namespace subgrad
