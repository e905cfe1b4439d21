#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace frameseg {

// Precondition or shape violation on a library call.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Malformed text (mask strings, JSONL records, config lines). `position` is a
// character index or a 1-based line number depending on the producer.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what), position_(position) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Dataset-level problems: missing files, inconsistent corpora, qid mismatches.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite losses or gradients during training.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace frameseg
