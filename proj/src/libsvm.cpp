#include "agghb/libsvm.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "agghb/error.hpp"

namespace agghb::libsvm {
namespace {

// Indices feed 32-bit gathers downstream.
constexpr std::uint64_t kMaxIndex = std::numeric_limits<std::int32_t>::max();

std::optional<double> parse_number(std::string_view s) {
  if (s.size() > 1 && s.front() == '+' && s[1] != '+' && s[1] != '-') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<std::uint64_t> parse_index(std::string_view s) {
  if (s.empty() || s.front() < '0' || s.front() > '9') return std::nullopt;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// std::uniform_real_distribution is implementation-defined; this is not.
double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

}  // namespace

ParseResult parse(std::istream& in) {
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const auto tokens = tokenize(view);
    if (tokens.empty()) continue;

    Record rec;
    const auto label = parse_number(tokens[0]);
    if (!label) throw ParseError("malformed label", line_no, std::string(tokens[0]));
    rec.label = *label;

    rec.entries.reserve(tokens.size() - 1);
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const std::string_view tok = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected <index>:<value>", line_no, std::string(tok));
      }
      const auto index = parse_index(tok.substr(0, colon));
      if (!index || *index == 0 || *index > kMaxIndex) {
        throw ParseError("feature index must be an integer in [1, 2^31)", line_no,
                         std::string(tok));
      }
      const auto value = parse_number(tok.substr(colon + 1));
      if (!value) throw ParseError("malformed feature value", line_no, std::string(tok));
      rec.entries.push_back({static_cast<std::uint32_t>(*index), *value});
    }

    const auto by_index = [](const Entry& a, const Entry& b) { return a.index < b.index; };
    if (!std::is_sorted(rec.entries.begin(), rec.entries.end(), by_index)) {
      std::stable_sort(rec.entries.begin(), rec.entries.end(), by_index);
      ++out.reordered_records;
    }
    const auto dup = std::adjacent_find(
        rec.entries.begin(), rec.entries.end(),
        [](const Entry& a, const Entry& b) { return a.index == b.index; });
    if (dup != rec.entries.end()) {
      throw ParseError("duplicate feature index", line_no, std::to_string(dup->index));
    }
    if (!rec.entries.empty()) {
      out.max_index = std::max<std::size_t>(out.max_index, rec.entries.back().index);
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

ParseResult parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse(in);
}

ParseResult parse_file(const std::filesystem::path& path) {
  const std::string name = path.string();
  if (name.size() >= 3 && name.compare(name.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(name.c_str(), "rb");
    if (gz == nullptr) throw std::runtime_error("cannot open " + name);
    std::string text;
    char buf[1 << 16];
    int got = 0;
    while ((got = gzread(gz, buf, sizeof buf)) > 0) text.append(buf, static_cast<std::size_t>(got));
    const bool failed = got < 0;
    gzclose(gz);
    if (failed) throw std::runtime_error("corrupt gzip stream in " + name);
    return parse(std::string_view(text));
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + name);
  return parse(in);
}

std::string serialize(const std::vector<Record>& records) {
  std::string out;
  for (const auto& rec : records) {
    out += format_number(rec.label);
    for (const auto& e : rec.entries) {
      out += ' ';
      out += std::to_string(e.index);
      out += ':';
      out += format_number(e.value);
    }
    out += '\n';
  }
  return out;
}

Dataset to_dataset(const std::vector<Record>& records, std::optional<LabelMapping> mapping,
                   std::optional<std::size_t> dim) {
  if (records.empty()) throw std::invalid_argument("to_dataset: no records");

  std::set<double> distinct;
  std::size_t max_index = 0;
  for (const auto& r : records) {
    distinct.insert(r.label);
    if (!r.entries.empty()) max_index = std::max<std::size_t>(max_index, r.entries.back().index);
  }

  auto subset_of = [&](double a, double b) {
    return std::all_of(distinct.begin(), distinct.end(),
                       [&](double v) { return v == a || v == b; });
  };
  LabelMapping map;
  if (mapping) {
    map = *mapping;
    if (map.negative == map.positive || !subset_of(map.negative, map.positive)) {
      throw std::invalid_argument("to_dataset: labels do not match the supplied mapping");
    }
  } else if (subset_of(-1.0, 1.0)) {
    map = {-1.0, 1.0};
  } else if (subset_of(0.0, 1.0)) {
    map = {0.0, 1.0};
  } else {
    std::string listed;
    for (double v : distinct) listed += (listed.empty() ? "" : ", ") + format_number(v);
    throw std::invalid_argument("to_dataset: cannot map labels {" + listed +
                                "} to {-1, +1} without an explicit mapping");
  }

  const std::size_t cols = dim.value_or(max_index);
  if (cols < max_index) {
    throw std::invalid_argument("to_dataset: dimension " + std::to_string(cols) +
                                " is smaller than the largest index " +
                                std::to_string(max_index));
  }

  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col_index;
  std::vector<double> values;
  std::vector<double> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    labels.push_back(r.label == map.positive ? 1.0 : -1.0);
    for (const auto& e : r.entries) {
      col_index.push_back(e.index - 1);
      values.push_back(e.value);
    }
    row_ptr.push_back(values.size());
  }
  return Dataset{FeatureMatrix::from_csr(records.size(), cols, std::move(row_ptr),
                                         std::move(col_index), std::move(values)),
                 std::move(labels)};
}

Dataset load(const std::filesystem::path& path, std::optional<LabelMapping> mapping,
             std::optional<std::size_t> dim) {
  return to_dataset(parse_file(path).records, mapping, dim);
}

Dataset synthetic(std::size_t samples, std::size_t features, std::uint64_t seed) {
  if (samples == 0 || features == 0) throw std::invalid_argument("synthetic: empty shape");
  std::mt19937_64 gen(seed);
  std::vector<double> weights(features);
  for (double& w : weights) w = 4.0 * uniform01(gen) - 2.0;

  std::vector<double> a(samples * features);
  std::vector<double> labels(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    double score = 0.0;
    for (std::size_t j = 0; j < features; ++j) {
      double v = 0.0;
      if (j % 3 == 0) {
        v = uniform01(gen) < 0.5 ? -1.0 : 1.0;
      } else {
        // Skewed toward -1, as min-max scaled heavy-tailed columns are.
        const double u = uniform01(gen);
        v = 2.0 * u * u * u - 1.0;
      }
      a[i * features + j] = v;
      score += weights[j] * v;
    }
    const double p = 1.0 / (1.0 + std::exp(-0.5 * score));
    labels[i] = uniform01(gen) < p ? 1.0 : -1.0;
  }
  return Dataset{FeatureMatrix::from_dense(samples, features, std::move(a)).to_layout(
                     FeatureMatrix::Layout::sparse),
                 std::move(labels)};
}

}  // namespace agghb::libsvm
