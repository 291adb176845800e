#pragma once

#include <stdexcept>
#include <string>

namespace scol {

// Protocol-level violation: shape/scale mismatch between shares, reuse of
// single-use randomness, exhausted budget, bad message ordering.
struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeError : ProtocolError {
    explicit ShapeError(const std::string& what) : ProtocolError(what) {}
};

// Value outside the representable fixed-point range.
struct RangeError : std::runtime_error {
    explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file or wire bytes.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Closed or broken channel.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Infeasible data split request.
struct AllocationError : std::runtime_error {
    explicit AllocationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scol
