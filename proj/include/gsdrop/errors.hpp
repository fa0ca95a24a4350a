// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gsdrop {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates an operation's preconditions.
class InvalidParameterError : public Error {
public:
    using Error::Error;
};

/// The input is structurally valid but statistically degenerate
/// (e.g. zero-variance attribute, all-transparent cloud).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// A distance bin contains no point pairs.
class EmptyBinError : public Error {
public:
    using Error::Error;
};

/// A file could not be parsed; the message names the offending element.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure (missing file, unwritable path).
class IoError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class TrainingDivergenceError : public Error {
public:
    using Error::Error;
};

}  // namespace gsdrop
