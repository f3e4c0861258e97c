#pragma once

#include <stdexcept>
#include <string>

namespace dhr {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Missing or malformed asset file. The message names the path.
class LoadError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (too many lights, bad intrinsics, unknown key value).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Caller broke a precondition (index out of range, mismatched dimensions).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Lookup outside a valid range: trajectory frame before the first keyframe, evicted pose.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Degenerate geometry, e.g. a camera whose up vector is parallel to its view direction.
class MathError : public Error {
public:
    using Error::Error;
};

/// Corrupt packet or compressed stream. Callers drop the frame and continue.
class DecodeError : public Error {
public:
    using Error::Error;
};

/// Peer sent something that violates the frame protocol (e.g. a bitmap from the future).
class ProtocolError : public Error {
public:
    using Error::Error;
};

class TransportError : public Error {
public:
    using Error::Error;
};

} // namespace dhr
