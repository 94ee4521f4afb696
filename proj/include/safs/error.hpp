#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace safs {

// malformed input file; line is 1-based, 0 when unknown
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// SGD produced a non-finite loss
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// a model handed to the sensitivity estimator returned NaN or inf
class ModelEvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace safs
