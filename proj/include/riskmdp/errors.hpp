#pragma once

#include <stdexcept>
#include <string>

namespace riskmdp {

/// Malformed input document: missing or unknown keys, wrong JSON types, unknown labels.
class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A structurally complete model that violates a model invariant.
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of an operation (bad index, kappa <= 0, length mismatch, ...).
class DomainError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Observation with zero predictive probability; the Bayes operator is undefined there.
class ZeroProbabilityObservation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed a configured size cap.
class CapExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace riskmdp
