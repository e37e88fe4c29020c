#pragma once

#include <stdexcept>
#include <string>

namespace lifeplan {

// Machine-readable failure kinds. The CLI maps these onto process exit codes,
// so solver code must throw Error with the right code rather than a bare
// std::runtime_error.
enum class ErrorCode {
    KappaNonPositive,       // effective income discount <= 0: human capital infinite
    NeedsRhoPlusMGreaterR,  // free-boundary solve requires rho + m > r
    ImmediatePurchase,      // query only meaningful when purchase can be delayed
    DomainError,            // argument outside the admissible domain
    NoRoot,                 // bracketed root search found no sign change
    AdmissibilityViolated,  // wealth floor breached in the post-purchase region
    DegenerateBoundary,     // insurance offers no gain; boundary undefined
    UnsupportedRegime,      // parameters outside the single-boundary regime
    NoConvergence,          // iterative scheme exhausted its budget
    NonFiniteUtility,       // utility evaluated at a non-positive consumption
    ConfigError,            // malformed or unknown configuration input
};

std::string to_string(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(to_string(code) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace lifeplan
