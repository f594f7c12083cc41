#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapetweak {

// A caller broke a documented precondition (length mismatch, unknown label,
// shapelet longer than the series, ...).
class ContractViolation : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

// Training could not produce a forest from the given data.
class TrainingError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset, model or instance file. `line` is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

// Experiment set-up that cannot be evaluated (e.g. a class missing from the train split).
class ExperimentError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapetweak
