#pragma once

#include <stdexcept>
#include <string>

namespace gngwt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. The message names the offending line or byte offset.
class ParseError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Training could not produce a usable model (degenerate parameters, budget exceeded).
class GngFailure : public Error {
public:
    using Error::Error;
};

/// Mesh topology does not satisfy an operation's precondition
/// (non-manifold edge, non-orientable surface).
class TopologyError : public Error {
public:
    using Error::Error;
};

}  // namespace gngwt
