#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace flowsynth {

/// Base of every error raised by the library. The CLI maps the concrete
/// subclasses onto its exit-code contract.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a domain type's invariant at construction time.
class InvariantError : public Error {
public:
    using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

/// A file does not parse as the format it claims to be.
class FormatError : public Error {
public:
    explicit FormatError(const std::string &what, std::optional<std::size_t> offset = std::nullopt)
        : Error(offset ? what + " (at byte offset " + std::to_string(*offset) + ")" : what),
          offset_(offset) {}

    std::optional<std::size_t> offset() const noexcept { return offset_; }

private:
    std::optional<std::size_t> offset_;
};

/// A file parses but carries unusable values (NaN, Inf, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// Filesystem level failure: missing file, unwritable path, short write.
class IoError : public Error {
public:
    using Error::Error;
};

/// Caller supplied inputs that cannot be used (missing directory, empty tree, unknown id).
class InputError : public Error {
public:
    using Error::Error;
};

/// Inputs are individually valid but inconsistent with each other
/// (duplicate ids, frame-count mismatches, dimension mismatches).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

} // namespace flowsynth
