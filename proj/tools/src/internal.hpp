#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string_view>
#include <vector>

#include "subgrad/cli/config.hpp"
#include "subgrad/data.hpp"
#include "subgrad/engine.hpp"
#include "subgrad/problems.hpp"

namespace subgrad::cli {

/// Independent seed for an auxiliary random stream (oracle sets, Monte-Carlo
/// constants) so it never coincides with a replication seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

LassoProblem make_lasso_problem(const LassoSection& l);
SvmGaussianSpec make_svm_spec(const DataSection& d);
RunConfig to_run_config(const RunSection& run);

/// Training samples from data.train, or `n` draws from the Gaussian source.
std::vector<Sample> load_svm_samples(const ExperimentConfig& cfg, std::size_t n);

void ensure_directory(const std::filesystem::path& dir);
std::ofstream open_output(const std::filesystem::path& path);
void finish_output(std::ofstream& out, const std::filesystem::path& path);

}  // namespace subgrad::cli
