#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapetweak/series.hpp"

namespace shapetweak {

/// Field separator of a label-first delimited file. `whitespace` splits on
/// runs of blanks (the older UCR layout).
enum class Delimiter { comma, tab, whitespace };

std::string_view to_string(Delimiter d) noexcept;
Delimiter parse_delimiter(std::string_view name);

struct DatasetFile {
  std::vector<LabeledSeries> records;
  std::filesystem::path source;
  Delimiter delimiter = Delimiter::comma;

  std::size_t rows() const noexcept { return records.size(); }
  /// Longest series length (the column count when lengths are equal).
  std::size_t max_length() const noexcept;
  bool equal_lengths() const noexcept;
};

struct ParseOptions {
  std::optional<Delimiter> delimiter;  // autodetected from the first row when unset
  bool strict_length = false;          // reject rows whose length differs from the first
  bool normalize = false;              // z-normalize every series after parsing
};

/// UCR-style text: one series per line, label token first, then values.
/// Throws ParseError (with a 1-based line number) on empty rows, non-numeric
/// or non-finite values, and mixed delimiters.
DatasetFile parse_ucr_text(std::string_view text, const ParseOptions& options = {});
DatasetFile parse_ucr(const std::filesystem::path& path, const ParseOptions& options = {});

/// Writes rows with doubles in shortest round-trip form.
std::string format_ucr(const std::vector<LabeledSeries>& records, Delimiter delimiter);
void write_ucr(const std::filesystem::path& path, const std::vector<LabeledSeries>& records,
               Delimiter delimiter);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace shapetweak
