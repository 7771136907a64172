#include <CLI11.hpp>
#include <iostream>

#include "subgrad/cli/commands.hpp"

namespace cli = subgrad::cli;

int main(int argc, char** argv) {
  CLI::App app{"Constant step-size stochastic subgradient learning with exponential smoothing"};
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides overrides;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string out_dir;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI experiment configuration")->required();
    sub->add_option("--seed", seed, "Base seed (overrides run.seed)");
    sub->add_option("--workers", workers, "Concurrent replications (overrides run.workers)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  };

  using Command = int (*)(const cli::ExperimentConfig&, std::ostream&);
  struct Entry {
    const char* name;
    const char* help;
    Command fn;
  };
  const Entry entries[] = {
      {"run", "Run replications and write curves.csv and summary.txt", cli::cmd_run},
      {"denoise", "TV-denoise an image with smoothed subgradient steps", cli::cmd_denoise},
      {"verify", "Check the modelling assumptions by Monte-Carlo", cli::cmd_verify},
      {"svm-train", "Train a linear SVM on a LIBSVM file", cli::cmd_svm_train},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kSuccess : cli::kUsageError;
  }

  for (const auto& [sub, fn] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) overrides.seed = seed;
    if (sub->count("--workers")) overrides.workers = workers;
    if (sub->count("--out")) overrides.out = out_dir;
    try {
      auto cfg = cli::load_config(config_path);
      cli::apply(overrides, cfg);
      return fn(cfg, std::cout);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::exit_code_for(e);
    }
  }
  return cli::kUsageError;
}
