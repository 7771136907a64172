#include "subgrad/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace subgrad::cli {

namespace pt = boost::property_tree;

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(const std::string& key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
    throw ConfigError(key, "expected a finite number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "expected a nonnegative integer, got '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos > start) out.push_back(text.substr(start, pos - start));
  }
  return out;
}

// Reads keys from the tree and remembers which ones were consumed.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    auto node = tree_.get_child_optional(pt::ptree::path_type(key, '.'));
    if (!node) return std::nullopt;
    return node->data();
  }

  void real(const std::string& key, double& out) {
    if (auto v = raw(key)) out = to_double(key, *v);
  }
  void positive(const std::string& key, double& out) {
    real(key, out);
    if (seen_value(key) && !(out > 0.0)) throw ConfigError(key, "must be positive");
  }
  void nonnegative(const std::string& key, double& out) {
    real(key, out);
    if (seen_value(key) && !(out >= 0.0)) throw ConfigError(key, "must be nonnegative");
  }
  void count(const std::string& key, std::size_t& out, std::size_t min = 0) {
    if (auto v = raw(key)) {
      out = static_cast<std::size_t>(to_u64(key, *v));
      if (out < min) throw ConfigError(key, "must be at least " + std::to_string(min));
    }
  }
  void u64(const std::string& key, std::uint64_t& out) {
    if (auto v = raw(key)) out = to_u64(key, *v);
  }
  void path(const std::string& key, std::optional<std::filesystem::path>& out) {
    if (auto v = raw(key)) {
      const auto t = trim(*v);
      if (t.empty()) throw ConfigError(key, "path must not be empty");
      out = std::filesystem::path(std::string(t));
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (auto v = raw(key)) {
      const auto t = trim(*v);
      if (t == "true" || t == "1" || t == "yes") out = true;
      else if (t == "false" || t == "0" || t == "no") out = false;
      else throw ConfigError(key, "expected true or false");
    }
  }

  /// Throws for any key that no reader asked for.
  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside of a section");
      for (const auto& [key, value] : body) {
        const std::string full = section + "." + key;
        if (!seen_.count(full)) throw ConfigError(full, "unknown key");
      }
    }
  }

 private:
  bool seen_value(const std::string& key) const {
    return tree_.get_child_optional(pt::ptree::path_type(key, '.')).has_value();
  }

  const pt::ptree& tree_;
  std::set<std::string> seen_;
};

}  // namespace

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Lasso: return "lasso";
    case ProblemKind::Svm: return "svm";
    case ProblemKind::Tv: return "tv";
  }
  return "?";
}

ExperimentConfig default_config(ProblemKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case ProblemKind::Lasso:
      cfg.run.mu = 0.001;
      cfg.run.iterations = 200000;
      cfg.run.record_stride = 100;
      break;
    case ProblemKind::Svm:
      cfg.run.mu = 0.01;
      cfg.run.iterations = 200000;
      cfg.run.record_stride = 1000;
      break;
    case ProblemKind::Tv:
      cfg.run.mu = 0.002;
      cfg.run.iterations = 300;
      cfg.run.record_stride = 1;
      break;
  }
  return cfg;
}

ExperimentConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  Reader r(tree);

  const auto type = r.raw("problem.type");
  if (!type) throw ConfigError("problem.type", "missing (expected lasso, svm or tv)");
  const auto t = trim(*type);
  ProblemKind kind;
  if (t == "lasso") kind = ProblemKind::Lasso;
  else if (t == "svm") kind = ProblemKind::Svm;
  else if (t == "tv") kind = ProblemKind::Tv;
  else throw ConfigError("problem.type", "expected lasso, svm or tv, got '" + std::string(t) + "'");
  ExperimentConfig cfg = default_config(kind);

  switch (kind) {
    case ProblemKind::Lasso: {
      auto& l = cfg.lasso;
      r.nonnegative("problem.delta", l.delta);
      r.count("problem.dimension", l.dimension, 1);
      if (auto v = r.raw("problem.w_nonzero")) {
        l.w_nonzero.clear();
        std::size_t prev = 0;
        for (auto tok : split_ws(*v)) {
          const auto colon = tok.find(':');
          if (colon == std::string_view::npos) throw ConfigError("problem.w_nonzero", "expected index:value pairs");
          const auto idx = static_cast<std::size_t>(to_u64("problem.w_nonzero", tok.substr(0, colon)));
          if (idx <= prev) throw ConfigError("problem.w_nonzero", "indices must be 1-based and increasing");
          prev = idx;
          l.w_nonzero.emplace_back(idx, to_double("problem.w_nonzero", tok.substr(colon + 1)));
        }
      }
      if (!l.w_nonzero.empty() && l.w_nonzero.back().first > l.dimension) {
        throw ConfigError("problem.w_nonzero", "index exceeds problem.dimension");
      }
      r.positive("problem.rh_scale", l.rh_scale);
      r.nonnegative("problem.sigma_n2", l.sigma_n2);
      r.count("problem.a_samples", l.a_samples, 1);
      break;
    }
    case ProblemKind::Svm:
      r.positive("problem.rho", cfg.svm.rho);
      break;
    case ProblemKind::Tv:
      r.nonnegative("problem.lambda", cfg.tv.lambda);
      break;
  }

  auto& run = cfg.run;
  r.positive("run.mu", run.mu);
  if (auto v = r.raw("run.kappa")) {
    if (trim(*v) != "auto") {
      const double k = to_double("run.kappa", *v);
      if (!(k >= 0.0 && k < 1.0)) throw ConfigError("run.kappa", "must lie in [0, 1) or be 'auto'");
      run.kappa = k;
    }
  }
  r.count("run.iterations", run.iterations);
  r.count("run.record_stride", run.record_stride, 1);
  r.u64("run.seed", run.seed);
  r.count("run.replications", run.replications, 1);
  r.count("run.workers", run.workers, 1);
  r.count("run.epochs", run.epochs, 1);

  auto& d = cfg.data;
  r.count("data.dimension", d.dimension, 1);
  r.real("data.mean", d.mean);
  r.positive("data.variance", d.variance);
  r.real("data.prior_pos", d.prior_pos);
  if (!(d.prior_pos >= 0.0 && d.prior_pos <= 1.0)) throw ConfigError("data.prior_pos", "must lie in [0, 1]");
  r.count("data.frozen_samples", d.frozen_samples, 1);
  r.count("data.oracle_iterations", d.oracle_iterations, 1);
  r.path("data.train", d.train);
  r.path("data.test", d.test);
  r.path("data.image", d.image);
  r.path("data.noisy", d.noisy);
  r.nonnegative("data.sigma", d.sigma);
  r.boolean("data.normalize", d.normalize);
  r.count("data.rows", d.rows, 2);
  r.count("data.cols", d.cols, 2);

  auto& ver = cfg.verify;
  r.count("verify.pairs", ver.pairs, 1);
  r.count("verify.probes", ver.probes, 1);
  r.count("verify.noise_samples", ver.noise_samples, 2);
  r.count("verify.frozen_samples", ver.frozen_samples, 1);
  r.count("verify.oracle_iterations", ver.oracle_iterations, 1);
  r.positive("verify.probe_scale", ver.probe_scale);
  r.positive("verify.d_scale", ver.d_scale);
  if (auto v = r.raw("verify.scales")) {
    ver.scales.clear();
    for (auto tok : split_ws(*v)) {
      const double s = to_double("verify.scales", tok);
      if (!(s > 0.0)) throw ConfigError("verify.scales", "scales must be positive");
      ver.scales.push_back(s);
    }
    if (ver.scales.empty()) throw ConfigError("verify.scales", "at least one scale is required");
  }

  std::optional<std::filesystem::path> out;
  r.path("output.dir", out);
  if (out) cfg.output_dir = *out;

  r.reject_unknown();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg = parse_config(buf.str());
  // Relative data paths are taken relative to the config file.
  const auto base = path.parent_path();
  for (auto* p : {&cfg.data.train, &cfg.data.test, &cfg.data.image, &cfg.data.noisy}) {
    if (*p && p->value().is_relative()) *p = base / p->value();
  }
  return cfg;
}

}  // namespace subgrad::cli
