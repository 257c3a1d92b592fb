#ifndef PROXSG_ERROR_HPP_
#define PROXSG_ERROR_HPP_

#include <optional>
#include <stdexcept>
#include <string>

namespace proxsg {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kDegenerateStep = 3,
  kNotConverged = 4,
  kInfeasible = 5,
  kInfeasibleStart = 6,
  kNumericalFailure = 7,
  kProxFailure = 8,
  kIo = 9,
  kParse = 10,
  kLoad = 11,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Iteration at which a solver run failed, when known.
  std::optional<int> iteration;
  /// Last available numeric estimate (e.g. an unconverged spectral norm).
  std::optional<double> last_estimate;

 private:
  ErrorCode code_;
};

}  // namespace proxsg

#endif  // PROXSG_ERROR_HPP_
