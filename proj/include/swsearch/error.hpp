#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace swsearch {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed FASTA, matrix, CSV or JSON input.
class ParseError : public Error
{
public:
    using Error::Error;
};

/// A matrix name that is neither a builtin nor a readable file.
class UnknownMatrixError : public Error
{
public:
    using Error::Error;
};

/// Invalid parameters (gap penalties, lane width, worker count, ...).
class ConfigError : public Error
{
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error
{
public:
    using Error::Error;
};

/// Full-matrix traceback would exceed the memory budget.
class ResourceError : public Error
{
public:
    using Error::Error;
};

/// Elapsed time too small to be measured.
class TimingError : public Error
{
public:
    using Error::Error;
};

/// A worker of a distributed search failed.
class SearchError : public Error
{
public:
    using Error::Error;
};

/// A score left the signed 32-bit range. `index` names the offending
/// target (batch position or database index) when known.
class OverflowError : public Error
{
public:
    explicit OverflowError(const std::string& what, std::optional<std::size_t> index = std::nullopt)
        : Error(what), index_(index)
    {}

    std::optional<std::size_t> index() const noexcept { return index_; }

private:
    std::optional<std::size_t> index_;
};

} // namespace swsearch
