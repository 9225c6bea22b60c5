#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stagetv {

/// Argument outside an operation's domain (even kernel size, negative threshold, ...).
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Two grids/fields/symbols whose shapes do not match.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid solver or stage-wise configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerical pipeline (CLI exit code 2).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public NumericalError {
public:
  SingularSystemError(std::size_t row_bin, std::size_t col_bin, double magnitude)
      : NumericalError("singular Fourier system at frequency bin (" +
                       std::to_string(row_bin) + ", " + std::to_string(col_bin) +
                       "): |denominator| = " + std::to_string(magnitude)),
        row_bin_(row_bin), col_bin_(col_bin) {}

  std::size_t row_bin() const noexcept { return row_bin_; }
  std::size_t col_bin() const noexcept { return col_bin_; }

private:
  std::size_t row_bin_;
  std::size_t col_bin_;
};

class DivergenceError : public NumericalError {
public:
  DivergenceError(std::size_t iteration, const std::string& reason)
      : NumericalError("ADMM diverged at iteration " + std::to_string(iteration) + ": " + reason),
        iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

private:
  std::size_t iteration_;
};

/// Unreadable or unsupported image/trace file.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string& path, const std::string& reason)
      : std::runtime_error(path + ": " + reason) {}
};

} // namespace stagetv
