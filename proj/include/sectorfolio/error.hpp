#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sectorfolio {

/// Malformed or invariant-violating input text. `line()` is 1-based, 0 when
/// the failure is not tied to a line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Numerical blow-up (non-finite intermediate or loss).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Network / endpoint failure in the history fetch client.
class FetchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sectorfolio
