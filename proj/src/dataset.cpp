#include "shapetweak/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "shapetweak/errors.hpp"

namespace shapetweak {

std::string_view to_string(Delimiter d) noexcept {
  switch (d) {
    case Delimiter::comma: return "comma";
    case Delimiter::tab: return "tab";
    case Delimiter::whitespace: return "whitespace";
  }
  return "comma";
}

Delimiter parse_delimiter(std::string_view name) {
  if (name == "comma" || name == ",") return Delimiter::comma;
  if (name == "tab" || name == "\\t" || name == "\t") return Delimiter::tab;
  if (name == "whitespace" || name == "space" || name == " ") return Delimiter::whitespace;
  throw ParseError("unknown delimiter '" + std::string(name) + "'");
}

std::size_t DatasetFile::max_length() const noexcept {
  std::size_t m = 0;
  for (const auto& r : records) m = std::max(m, r.series.size());
  return m;
}

bool DatasetFile::equal_lengths() const noexcept {
  return std::all_of(records.begin(), records.end(), [&](const LabeledSeries& r) {
    return r.series.size() == records.front().series.size();
  });
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Delimiter detect(std::string_view line) {
  if (line.find('\t') != std::string_view::npos) return Delimiter::tab;
  if (line.find(',') != std::string_view::npos) return Delimiter::comma;
  return Delimiter::whitespace;
}

std::vector<std::string_view> split(std::string_view line, Delimiter d, std::size_t lineno) {
  std::vector<std::string_view> fields;
  if (d == Delimiter::whitespace) {
    if (line.find(',') != std::string_view::npos) {
      throw ParseError("comma in a whitespace-delimited file", lineno);
    }
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t\r", pos);
      if (start == std::string_view::npos) break;
      const auto end = line.find_first_of(" \t\r", start);
      fields.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
      pos = end == std::string_view::npos ? line.size() : end;
    }
    return fields;
  }
  const char sep = d == Delimiter::comma ? ',' : '\t';
  const char other = d == Delimiter::comma ? '\t' : ',';
  if (line.find(other) != std::string_view::npos) {
    throw ParseError("inconsistent delimiter", lineno);
  }
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    fields.push_back(trim(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

double parse_value(std::string_view token, std::size_t lineno) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError("non-numeric value '" + std::string(token) + "'", lineno);
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value '" + std::string(token) + "'", lineno);
  }
  return v;
}

}  // namespace

DatasetFile parse_ucr_text(std::string_view text, const ParseOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) {
    throw ParseError("dataset has no rows");
  }

  DatasetFile out;
  out.delimiter = options.delimiter.value_or(detect(lines.front()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trim(lines[i]).empty()) {
      throw ParseError("empty row", lineno);
    }
    const auto fields = split(lines[i], out.delimiter, lineno);
    if (fields.size() < 2) {
      throw ParseError("row needs a label and at least one value", lineno);
    }
    if (fields.front().empty()) {
      throw ParseError("empty label", lineno);
    }
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t f = 1; f < fields.size(); ++f) {
      values.push_back(parse_value(fields[f], lineno));
    }
    if (options.strict_length && !out.records.empty() &&
        values.size() != out.records.front().series.size()) {
      throw ParseError("row has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(out.records.front().series.size()),
                       lineno);
    }
    if (options.normalize) values = z_normalize(values);
    out.records.push_back({std::string(fields.front()), TimeSeries(std::move(values))});
  }
  return out;
}

DatasetFile parse_ucr(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open dataset " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto out = parse_ucr_text(buf.str(), options);
  out.source = path;
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string format_ucr(const std::vector<LabeledSeries>& records, Delimiter delimiter) {
  const char* sep = delimiter == Delimiter::comma ? "," : delimiter == Delimiter::tab ? "\t" : " ";
  std::string out;
  for (const auto& r : records) {
    out += r.label;
    for (double v : r.series.values()) {
      out += sep;
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_ucr(const std::filesystem::path& path, const std::vector<LabeledSeries>& records,
               Delimiter delimiter) {
  write_file_atomic(path, format_ucr(records, delimiter));
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw std::runtime_error("short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace shapetweak
