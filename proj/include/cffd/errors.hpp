// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace cffd {

class InvalidConfig : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidGeometry : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InsufficientPilots : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConstraintViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfeasibleProblem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config text error carrying the 1-based line number (0 when not tied to a line).
class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& what)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace cffd
