#pragma once

#include <stdexcept>
#include <string>

namespace socfedcs {

/// Invalid experiment or module configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A runtime invariant (constraint, drift bound, finiteness) failed. Exit code 3.
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A selected client has a zero-rate uplink and cannot upload its model.
class InfeasibleLink : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed IDX file: bad magic, truncation or count mismatch.
class IdxFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Brute-force enumeration requested above its cap.
class InstanceTooLarge : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace socfedcs
