#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wgpucb {

/// Invalid arguments or preconditions supplied by the caller.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Invalid experiment configuration (also reported as an input error by the CLI).
class ConfigError : public InputError {
public:
    using InputError::InputError;
};

/// Rounds or observations presented out of order.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A factorization failed even after the jitter ladder was exhausted.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, std::size_t size, double min_diag, double max_diag)
        : std::runtime_error(what + " (size " + std::to_string(size) + ", diagonal range [" +
                             std::to_string(min_diag) + ", " + std::to_string(max_diag) + "])"),
          size_(size), min_diag_(min_diag), max_diag_(max_diag) {}

    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}

    std::size_t size() const noexcept { return size_; }
    double min_diagonal() const noexcept { return min_diag_; }
    double max_diagonal() const noexcept { return max_diag_; }

private:
    std::size_t size_ = 0;
    double min_diag_ = 0.0;
    double max_diag_ = 0.0;
};

/// Output location cannot be created or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed price file. Row and column are 1-based positions in the file.
class IngestionError : public InputError {
public:
    IngestionError(const std::string& what, std::size_t row, std::size_t column)
        : InputError(what + " at row " + std::to_string(row) + ", column " + std::to_string(column)),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace wgpucb
