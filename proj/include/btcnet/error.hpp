#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btcnet {

/// Malformed input data. Carries the 1-based line number when known (0 otherwise).
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A regression design without full column rank.
class RankDeficientError : public std::domain_error {
    using std::domain_error::domain_error;
};

/// Sample that cannot support the requested statistic (too small, constant, all-zero, ...).
class DegenerateSampleError : public std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace btcnet
