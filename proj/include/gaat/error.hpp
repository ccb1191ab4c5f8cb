#pragma once

#include <stdexcept>
#include <string>

namespace gaat {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input (files, manifests, configs).
class InputError : public Error {
public:
    using Error::Error;
};

/// A sampling request that cannot be satisfied.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// The graph is too small or empty for the requested operation.
class DegenerateGraphError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced during a forward pass or loss evaluation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Missing or malformed command-line argument.
class UsageError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

}  // namespace gaat
