#ifndef MECHKIT_ERRORS_HPP
#define MECHKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mechkit {

/** Base of every error raised by the library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** Malformed or out-of-contract input (CLI exit status 1). */
class ValidationError : public Error {
 public:
  using Error::Error;
};

/** Index layouts of two vectors disagree. */
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/** An enumeration would exceed its configured size limit. */
class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/** A certificate failed to verify. */
class CertificationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/** Numerical precision was insufficient (CLI exit status 2). The transcript
 * holds the oracle calls leading to the failure. */
class PrecisionError : public Error {
 public:
  explicit PrecisionError(const std::string& what, std::string transcript = {})
      : Error(what), transcript_(std::move(transcript)) {}
  const std::string& transcript() const { return transcript_; }

 private:
  std::string transcript_;
};

/** An oracle broke its contract (CLI exit status 2). */
class ContractError : public PrecisionError {
 public:
  using PrecisionError::PrecisionError;
};

/** An LP or ellipsoid run found no feasible point. */
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace mechkit

#endif  // MECHKIT_ERRORS_HPP
