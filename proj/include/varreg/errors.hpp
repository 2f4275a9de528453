#pragma once

#include <stdexcept>
#include <string>

namespace varreg {

// Rejected input: bad dimensions, parameter ranges, malformed structures.
struct InvalidInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config document problems; the message carries the offending JSON path.
struct ConfigError : InvalidInputError {
  using InvalidInputError::InvalidInputError;
};

// Requested operation is not defined for the given object (e.g. prox of a
// penalty that only supports gradient handling).
struct UnsupportedOperationError : InvalidInputError {
  using InvalidInputError::InvalidInputError;
};

// Discrepancy-principle search could not place the residual inside the
// window: bracket expansion exhausted, or the noise level is degenerate.
struct NoAdmissibleAlphaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A regularized solve inside a parameter search did not converge; the
// message carries the probe context (alpha, defect reached).
struct SolverProbeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Not enough usable points for a fit, or a degenerate regression.
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace varreg
