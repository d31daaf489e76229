#pragma once

#include <stdexcept>
#include <string>

namespace lgdlab {

// Base of every error thrown by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A later date was expected, e.g. months_between(to < from).
class OrderingError : public Error {
public:
    using Error::Error;
};

// Input data breaks a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Configuration is invalid or incomplete (missing macro coverage, bad params).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A requested key (reference date, feature name) does not exist.
class LookupError : public Error {
public:
    using Error::Error;
};

// Records from two sources could not be matched one-to-one.
class JoinError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Malformed input files; message carries file/line context.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace lgdlab
