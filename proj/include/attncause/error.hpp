#pragma once

#include <stdexcept>
#include <string>

namespace attncause {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup of a node, item or pair that the container does not hold.
class UnknownNodeError : public Error {
public:
    using Error::Error;
};

/// An orientation tried to overwrite a settled Arrow/Tail with the other mark.
class MarkConflictError : public Error {
public:
    using Error::Error;
};

/// Singular matrices, zero-norm attention rows, correlations outside [-1, 1].
class DegenerateError : public Error {
public:
    using Error::Error;
};

class SampleSizeError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

/// A model query that the backing source cannot answer (e.g. a counterfactual
/// variant missing from a trace file with no live endpoint attached).
class UnavailableError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

}  // namespace attncause
