#pragma once

#include <stdexcept>
#include <string>

namespace pvq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad dimension, non-finite
/// value, out-of-range parameter, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An exact integer result does not fit the host integer width.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Malformed serialized data: bitstreams, database files, PGM images,
/// model and kernel files.
class FormatError : public Error {
public:
    enum class Kind {
        bad_magic,
        truncated,
        bad_header,
        index_out_of_range,
        bad_value,
        io,
    };

    FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace pvq
