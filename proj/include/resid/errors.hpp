#pragma once

#include <stdexcept>
#include <string>

namespace resid {

// Lexical or structural error in a source file, with a 1-based location.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, int column, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ":" +
                           std::to_string(column) + ": " + message),
        file_(std::move(file)),
        line_(line),
        column_(column) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string file_;
  int line_;
  int column_;
};

// A run record that violates its own invariants (empty visits, bug set
// empty, or no reported buggy chunk present in the visit list).
class MalformedRecordError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instrumenting sources against a chunk database built from different text.
class StaleDatabaseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Session store problems: missing session, lock held, out-of-order replay.
class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration: classification rules, graph files,
// parameter ranges.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bisection ran out of iterations. Carries the last bracket.
class SolverError : public std::runtime_error {
 public:
  SolverError(double lo, double hi)
      : std::runtime_error("bisection did not converge; last bracket [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        lo_(lo),
        hi_(hi) {}

  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace resid
