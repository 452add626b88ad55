#pragma once

#include <stdexcept>
#include <string>

namespace geomag {

// Caller broke a documented precondition (bad argument, out-of-order
// timestamps, unsupported sample spacing, ...).
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed input file or stream (JSON, JSONL, XYZ, PLY).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid config with inconsistent or unsupported content.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Not enough samples to run the requested estimator.
class InsufficientData : public std::runtime_error {
public:
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

// Base for numerically degenerate situations: the inputs are well-formed but
// the quantity asked for is not observable or not well conditioned.
class DegenerateInput : public std::runtime_error {
public:
    explicit DegenerateInput(const std::string& what) : std::runtime_error(what) {}
};

// Sweep geometry does not constrain the ellipsoid (coplanar or near-coplanar
// magnetometer samples).
class DegenerateFit : public DegenerateInput {
public:
    explicit DegenerateFit(const std::string& what) : DegenerateInput(what) {}
};

// Field gradient is rank deficient, so a displacement cannot be solved for.
class UnobservableDisplacement : public DegenerateInput {
public:
    explicit UnobservableDisplacement(const std::string& what) : DegenerateInput(what) {}
};

// Field direction too close to vertical (or to the gravity axis) for a
// heading to be extracted.
class DegenerateDip : public DegenerateInput {
public:
    explicit DegenerateDip(const std::string& what) : DegenerateInput(what) {}
};

// No window satisfying the static-detection thresholds was found.
class NotStatic : public DegenerateInput {
public:
    explicit NotStatic(const std::string& what) : DegenerateInput(what) {}
};

} // namespace geomag
