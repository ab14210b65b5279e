#pragma once

#include <stdexcept>
#include <string>

namespace rlqg {

// Base class for all toolkit errors. Subcommands map these to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// matrix_kernel
struct NotPositiveDefinite : Error { using Error::Error; };
struct ConvergenceFailure : Error { using Error::Error; };
struct NotPSD : Error { using Error::Error; };

// lqr
struct NotStabilizable : Error { using Error::Error; };
struct NotDetectable : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InvalidModel : Error { using Error::Error; };

// di_sdp
struct InfeasibleBudget : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };

// sensor
struct ZeroRank : Error { using Error::Error; };

// quantizer
struct NonFinite : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// codec
struct DegenerateCovariance : Error { using Error::Error; };
struct DecodeFailure : Error { using Error::Error; };

// sim_loop
struct NumericalDivergence : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// validation
struct QuadratureFailure : Error { using Error::Error; };

// model file parsing; carries the 1-based line number (0 = not line specific)
struct ParseError : Error {
  int line;
  ParseError(const std::string& msg, int line_no = 0) : Error(msg), line(line_no) {}
};

}  // namespace rlqg
