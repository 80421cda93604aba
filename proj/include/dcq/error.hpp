#pragma once

#include <stdexcept>
#include <string>

namespace dcq {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied a parameter outside the documented domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A discrete measure violated one of its structural invariants.
class InvalidMeasure : public Error {
public:
    using Error::Error;
};

/// Base for failures of a numerical procedure (as opposed to bad input).
class NumericError : public Error {
public:
    using Error::Error;
};

class ZeroMassCell : public NumericError {
public:
    using NumericError::NumericError;
};

class NegativeSupport : public NumericError {
public:
    using NumericError::NumericError;
};

class NonFiniteMean : public NumericError {
public:
    using NumericError::NumericError;
};

class DepthTooLarge : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class UnsupportedRule : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class NoConvergence : public NumericError {
public:
    using NumericError::NumericError;
};

/// An improper integral failed to settle (e.g. the integral of sqrt(F(1-F))
/// for tails heavier than x^-2).
class DivergentIntegral : public NumericError {
public:
    using NumericError::NumericError;
};

/// The integral of the square root of the density diverges.
class DivergentHalfDensity : public DivergentIntegral {
public:
    using DivergentIntegral::DivergentIntegral;
};

class UnboundedBelow : public NumericError {
public:
    using NumericError::NumericError;
};

class MemoryGuard : public NumericError {
public:
    using NumericError::NumericError;
};

} // namespace dcq
