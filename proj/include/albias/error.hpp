#pragma once

#include <stdexcept>
#include <string>

namespace albias {

/// Broad failure class; the CLI maps each to its own exit code.
enum class ErrorKind { Usage, Data, Compute };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ComputeError : public Error {
public:
    explicit ComputeError(const std::string& what) : Error(ErrorKind::Compute, what) {}
};

// CSV ingestion failures carry the 1-based row number that triggered them.
class MalformedRow : public DataError {
public:
    MalformedRow(std::size_t row, const std::string& why)
        : DataError("malformed row " + std::to_string(row) + ": " + why), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class LabelOutOfRange : public DataError {
public:
    LabelOutOfRange(std::size_t row, long label)
        : DataError("label " + std::to_string(label) + " out of range at row " + std::to_string(row)),
          row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace albias
