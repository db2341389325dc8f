#pragma once

#include <stdexcept>
#include <string>

namespace segbound {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A span reaches past the end of its document.
class OutOfBounds : public Error {
public:
    using Error::Error;
};

/// SFT target synthesis could not produce unique, locatable sequences.
class TargetSynthesisFailure : public Error {
public:
    using Error::Error;
};

/// Base for wire-format parse failures.
class ParseError : public Error {
public:
    using Error::Error;
};

class MalformedLine : public ParseError {
public:
    using ParseError::ParseError;
};

class UnknownLabel : public ParseError {
public:
    using ParseError::ParseError;
};

class EmptyOutput : public ParseError {
public:
    using ParseError::ParseError;
};

/// A metric that requires a lossless gold segmentation got one with gaps.
class GoldNotLossless : public Error {
public:
    using Error::Error;
};

class WindowTooLarge : public Error {
public:
    using Error::Error;
};

class IllegalPerturbation : public Error {
public:
    using Error::Error;
};

/// A corpus spec that cannot be satisfied (empty ranges, bad weights).
class SpecInfeasible : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

class SchemaViolation : public Error {
public:
    using Error::Error;
};

class InvalidGold : public Error {
public:
    using Error::Error;
};

} // namespace segbound
