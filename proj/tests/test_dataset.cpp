#include <doctest.h>

#include <filesystem>

#include "shapetweak/dataset.hpp"
#include "shapetweak/errors.hpp"
#include "test_support.hpp"

using namespace shapetweak;

namespace {

std::size_t error_line(std::string_view text, const ParseOptions& opts = {}) {
  try {
    parse_ucr_text(text, opts);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("comma rows") {
  const auto f = parse_ucr_text("1,0.5,0.25\n-1,1e-3,2\n");
  REQUIRE(f.rows() == 2);
  CHECK(f.delimiter == Delimiter::comma);
  CHECK(f.records[0].label == "1");
  CHECK(f.records[0].series == TimeSeries({0.5, 0.25}));
  CHECK(f.records[1].label == "-1");
  CHECK(f.records[1].series == TimeSeries({0.001, 2.0}));
  CHECK(f.equal_lengths());
  CHECK(f.max_length() == 2);
}

TEST_CASE("tab and whitespace rows") {
  const auto t = parse_ucr_text("1\t0.5\t0.25\r\n2\t3\t4\r\n");
  CHECK(t.delimiter == Delimiter::tab);
  CHECK(t.records[1].series == TimeSeries({3.0, 4.0}));

  const auto w = parse_ucr_text("  1.0000000e+00   5.0  -6.5\n 2.0  1  +2\n\n\n");
  CHECK(w.delimiter == Delimiter::whitespace);
  CHECK(w.records[0].label == "1.0000000e+00");
  CHECK(w.records[0].series == TimeSeries({5.0, -6.5}));
  CHECK(w.records[1].series == TimeSeries({1.0, 2.0}));
}

TEST_CASE("parse errors carry line numbers") {
  CHECK(error_line("1,2,3\n1,x,3\n") == 2);
  CHECK(error_line("1,2,3\n\n1,2,3\n") == 2);
  CHECK(error_line("1,2,3\n1,2,inf\n") == 2);
  CHECK(error_line("1,2,nan\n") == 1);
  CHECK(error_line("1,2,3\n1\t2\t3\n") == 2);
  CHECK(error_line("1,2,3\n1,,3\n") == 2);
  CHECK(error_line("1\n") == 1);
  CHECK(error_line(",1,2\n") == 1);
  CHECK_THROWS_AS(parse_ucr_text(""), ParseError);
  CHECK_THROWS_AS(parse_ucr_text("\n\n"), ParseError);
  CHECK_THROWS_AS(parse_ucr("/nonexistent/file.tsv"), ParseError);
  CHECK_THROWS_AS(parse_delimiter("semicolon"), ParseError);
}

TEST_CASE("strict length and variable length rows") {
  const std::string text = "a,1,2,3\nb,1,2\n";
  const auto loose = parse_ucr_text(text);
  CHECK_FALSE(loose.equal_lengths());
  CHECK(loose.max_length() == 3);
  ParseOptions strict;
  strict.strict_length = true;
  CHECK(error_line(text, strict) == 2);
}

TEST_CASE("normalization option") {
  ParseOptions opts;
  opts.normalize = true;
  const auto f = parse_ucr_text("a,1,2,3,4\n", opts);
  double mean = 0.0;
  for (double v : f.records[0].series.values()) mean += v;
  CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("explicit delimiter overrides detection") {
  ParseOptions opts;
  opts.delimiter = Delimiter::whitespace;
  CHECK(error_line("a,1,2\n", opts) == 1);
  opts.delimiter = Delimiter::tab;
  const auto f = parse_ucr_text("a\t1 \t 2\n", opts);
  CHECK(f.records[0].series == TimeSeries({1.0, 2.0}));
}

TEST_CASE("format and parse round trip exactly") {
  testsupport::SplitMix64 rng{55};
  std::vector<LabeledSeries> rows;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({i % 2 ? "pos" : "neg", TimeSeries(rng.vector(17, 1e3))});
  }
  rows.push_back({"tiny", TimeSeries({5e-324, -0.0, 1.0 / 3.0})});
  for (auto d : {Delimiter::comma, Delimiter::tab, Delimiter::whitespace}) {
    ParseOptions opts;
    opts.delimiter = d;
    const auto back = parse_ucr_text(format_ucr(rows, d), opts);
    REQUIRE(back.rows() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(back.records[i].label == rows[i].label);
      CHECK(back.records[i].series == rows[i].series);
    }
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "shapetweak_dataset_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "rows.csv";
  write_ucr(path, {{"x", TimeSeries({1.5, 2.5})}}, Delimiter::comma);
  CHECK_FALSE(std::filesystem::exists(dir / "rows.csv.tmp"));
  const auto f = parse_ucr(path);
  CHECK(f.source == path);
  CHECK(f.records[0].series == TimeSeries({1.5, 2.5}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("GunPoint training file when present") {
  const std::filesystem::path dir = SHAPETWEAK_DATA_DIR;
  const auto path = dir / "GunPoint" / "GunPoint_TRAIN.tsv";
  if (!std::filesystem::exists(path)) {
    MESSAGE("GunPoint not present under " << dir.string() << ", skipped");
    return;
  }
  const auto f = parse_ucr(path);
  CHECK(f.rows() == 50);
  CHECK(f.max_length() == 150);
  CHECK(f.equal_lengths());
}
