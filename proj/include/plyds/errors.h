#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plyds {

/// Bad arguments: dimension mismatches, out-of-range indices, invalid configs.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// A request for grid output in a state dimension that has no planar view.
class UnsupportedDimensionError : public InputError {
 public:
  explicit UnsupportedDimensionError(const std::string& what)
      : InputError(what) {}
};

/// Malformed file contents. `line()` is 1-based, or 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string file = {}, int line = 0)
      : std::runtime_error(Format(what, file, line)),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  static std::string Format(const std::string& what, const std::string& file,
                            int line) {
    std::string out;
    if (!file.empty()) out += file;
    if (line > 0) out += (out.empty() ? "line " : ":") + std::to_string(line);
    if (!out.empty()) out += ": ";
    return out + what;
  }

  std::string file_;
  int line_;
};

/// A dataset that parses but violates the demonstration assumptions.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A convex subproblem with no feasible point. `rows()` names the equality
/// rows (problem-specific labels) with the largest violation.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, std::vector<std::string> rows = {})
      : std::runtime_error(what), rows_(std::move(rows)) {}

  const std::vector<std::string>& rows() const { return rows_; }

 private:
  std::vector<std::string> rows_;
};

/// Solver non-convergence, non-finite values, and similar numerical trouble.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, long step = -1)
      : std::runtime_error(what), step_(step) {}

  /// Integration step at which the failure happened, or -1.
  long step() const { return step_; }

 private:
  long step_;
};

/// Learning finished without any certified iterate.
class LearningFailure : public std::runtime_error {
 public:
  explicit LearningFailure(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace plyds
