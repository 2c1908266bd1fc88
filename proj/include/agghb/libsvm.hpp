#pragma once

// LIBSVM text format:
//
//   <label> <index>:<value> <index>:<value> ...
//
// One record per line, 1-based feature indices, whitespace-separated tokens.
// Blank lines and lines starting with '#' are skipped; anything after a '#'
// on a record line is a comment. Indices are converted to 0-based columns
// when a Dataset is built and nowhere else.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agghb/feature_matrix.hpp"

namespace agghb::libsvm {

struct Entry {
  std::uint32_t index = 0;  // 1-based, as in the file
  double value = 0.0;

  bool operator==(const Entry&) const = default;
};

struct Record {
  double label = 0.0;
  std::vector<Entry> entries;  // strictly increasing index

  bool operator==(const Record&) const = default;
};

struct ParseResult {
  std::vector<Record> records;
  std::size_t max_index = 0;          // inferred feature count
  std::size_t reordered_records = 0;  // records whose indices were sorted
};

/// Throws ParseError (with the 1-based line number and offending token) on a
/// malformed label or feature, index 0, a duplicate index within a record, or
/// a non-finite value.
ParseResult parse(std::istream& in);
ParseResult parse(std::string_view text);

/// Reads a file, transparently decompressing it when the name ends in ".gz".
ParseResult parse_file(const std::filesystem::path& path);

/// Canonical text: one line per record, shortest round-trip number format.
std::string serialize(const std::vector<Record>& records);

/// Explicit two-value label mapping: `negative` becomes -1, `positive` +1.
struct LabelMapping {
  double negative = 0.0;
  double positive = 1.0;
};

/// Label policy: {-1, +1} kept, {0, 1} mapped 0 -> -1, anything else needs an
/// explicit mapping. `dim` overrides the inferred feature count (it must not
/// be smaller than the largest index). Throws std::invalid_argument for an
/// empty record list or an unmappable label set.
Dataset to_dataset(const std::vector<Record>& records,
                   std::optional<LabelMapping> mapping = std::nullopt,
                   std::optional<std::size_t> dim = std::nullopt);

/// Parse a file and build a dataset in one go.
Dataset load(const std::filesystem::path& path,
             std::optional<LabelMapping> mapping = std::nullopt,
             std::optional<std::size_t> dim = std::nullopt);

/// Deterministic stand-in for a small tabular benchmark when no real file is
/// available: `samples` rows, `features` columns in [-1, 1] (a mix of binary
/// and continuous columns, like a scaled credit dataset), labels drawn from a
/// noisy logistic model so the classes overlap.
Dataset synthetic(std::size_t samples, std::size_t features, std::uint64_t seed);

}  // namespace agghb::libsvm
