#include <algorithm>
#include <array>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

#include "subgrad/data.hpp"
#include "subgrad/error.hpp"

namespace subgrad {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

double parse_real(std::string_view tok, std::size_t line, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || end != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite ") + what);
  return v;
}

SparseRecord parse_line(std::string_view text, std::size_t line, LabelMode mode) {
  SparseRecord rec;
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < text.size() && !is_space(text[pos])) ++pos;
    return text.substr(start, pos - start);
  };

  const double label = parse_real(next_token(), line, "label");
  if (mode == LabelMode::Binary) {
    if (label == 1.0) rec.label = 1.0;
    else if (label == -1.0 || label == 0.0) rec.label = -1.0;
    else throw ParseError(line, "classification label must be -1, 0 or +1");
  } else {
    rec.label = label;
  }

  std::size_t prev = 0;
  for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
    const auto colon = tok.find(':');
    if (colon == std::string_view::npos) throw ParseError(line, "feature '" + std::string(tok) + "' lacks ':'");
    std::size_t idx = 0;
    const auto key = tok.substr(0, colon);
    const auto [end, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
    if (ec != std::errc() || end != key.data() + key.size() || key.empty() || idx == 0) {
      throw ParseError(line, "invalid feature index '" + std::string(key) + "'");
    }
    if (idx <= prev) throw ParseError(line, "feature indices must be strictly increasing");
    prev = idx;
    rec.features.emplace_back(idx, parse_real(tok.substr(colon + 1), line, "feature value"));
  }
  return rec;
}

void append_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), end);
}

}  // namespace

DatasetFile parse_libsvm(std::string_view text, LabelMode mode) {
  DatasetFile data;
  std::size_t line = 0;
  while (!text.empty()) {
    ++line;
    const auto nl = text.find('\n');
    const auto row = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    bool blank = true;
    for (char c : row) blank = blank && is_space(c);
    if (blank) continue;
    SparseRecord rec = parse_line(row, line, mode);
    if (!rec.features.empty()) data.dimension = std::max(data.dimension, rec.features.back().first);
    data.records.push_back(std::move(rec));
  }
  return data;
}

std::string serialize_libsvm(const DatasetFile& data) {
  std::string out;
  for (const auto& rec : data.records) {
    append_number(out, rec.label);
    for (const auto& [idx, value] : rec.features) {
      out.push_back(' ');
      out += std::to_string(idx);
      out.push_back(':');
      append_number(out, value);
    }
    out.push_back('\n');
  }
  return out;
}

DatasetFile read_libsvm_file(const std::filesystem::path& path, LabelMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return parse_libsvm(buf.str(), mode);
}

std::vector<Sample> DatasetFile::dense(std::optional<std::size_t> dim) const {
  const std::size_t M = dim.value_or(dimension);
  std::vector<Sample> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    Sample s;
    s.h = Vector::Zero(static_cast<Eigen::Index>(M));
    s.gamma = rec.label;
    for (const auto& [idx, value] : rec.features)
      if (idx <= M) s.h[static_cast<Eigen::Index>(idx - 1)] = value;
    out.push_back(std::move(s));
  }
  return out;
}

DatasetStream::DatasetStream(const std::vector<Sample>& samples, std::uint64_t seed) : samples_(&samples), rng_(seed) {
  if (samples.empty()) throw InsufficientData("cannot sample from an empty dataset");
}

std::optional<Sample> DatasetStream::next() { return (*samples_)[rng_.below(samples_->size())]; }

std::optional<Sample> SequentialStream::next() {
  if (pos_ >= samples_->size()) return std::nullopt;
  return (*samples_)[pos_++];
}

}  // namespace subgrad
