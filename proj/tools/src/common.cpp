#include <exception>
#include <system_error>

#include "internal.hpp"
#include "subgrad/cli/commands.hpp"

namespace subgrad::cli {

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  // FNV-1a over the tag, then one splitmix64 round.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LassoProblem make_lasso_problem(const LassoSection& l) {
  const auto M = static_cast<Eigen::Index>(l.dimension);
  Vector w_true = Vector::Zero(M);
  for (const auto& [idx, value] : l.w_nonzero) w_true[static_cast<Eigen::Index>(idx - 1)] = value;
  return LassoProblem(l.delta, std::move(w_true), l.rh_scale * Matrix::Identity(M, M), l.sigma_n2);
}

SvmGaussianSpec make_svm_spec(const DataSection& d) {
  const auto M = static_cast<Eigen::Index>(d.dimension);
  SvmGaussianSpec spec;
  spec.mean_pos = Vector::Constant(M, d.mean);
  spec.mean_neg = Vector::Constant(M, -d.mean);
  spec.cov_pos = d.variance * Matrix::Identity(M, M);
  spec.cov_neg = spec.cov_pos;
  spec.prior_pos = d.prior_pos;
  spec.prior_neg = 1.0 - d.prior_pos;
  return spec;
}

RunConfig to_run_config(const RunSection& run) {
  RunConfig rc;
  rc.mu = run.mu;
  rc.kappa = run.kappa;
  rc.iterations = run.iterations;
  rc.record_stride = run.record_stride;
  rc.seed = run.seed;
  rc.replications = run.replications;
  return rc;
}

std::vector<Sample> load_svm_samples(const ExperimentConfig& cfg, std::size_t n) {
  if (cfg.data.train) {
    auto data = read_libsvm_file(*cfg.data.train);
    if (data.size() == 0 || data.dimension == 0) throw InsufficientData("training file has no samples");
    return data.dense();
  }
  SvmGaussianStream stream(make_svm_spec(cfg.data), derive_seed(cfg.run.seed, "svm-frozen"));
  std::vector<Sample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) out.push_back(*stream.next());
  return out;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

void apply(const Overrides& o, ExperimentConfig& cfg) {
  if (o.seed) cfg.run.seed = *o.seed;
  if (o.workers) {
    if (*o.workers == 0) throw ConfigError("--workers", "must be at least 1");
    cfg.run.workers = *o.workers;
  }
  if (o.out) cfg.output_dir = *o.out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidArgument*>(&e) ||
      dynamic_cast<const InvalidConfiguration*>(&e) || dynamic_cast<const UnsupportedConfiguration*>(&e)) {
    return kUsageError;
  }
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const FormatError*>(&e)) {
    return kIoError;
  }
  return kPropertyFailure;
}

}  // namespace subgrad::cli
