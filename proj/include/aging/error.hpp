#pragma once

#include <stdexcept>
#include <string>

namespace aging {

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  Domain,
  SingularDesign,
  InsufficientData,
  GridMismatch,
  DegenerateCurve,
  Parse,
  DuplicateRecord,
  Spec,
};

// Errors split into two families for exit-status mapping: data problems
// (malformed input, too few observations) and numerical failures.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  bool is_numerical() const noexcept {
    return code_ == ErrorCode::SingularDesign || code_ == ErrorCode::DegenerateCurve ||
           code_ == ErrorCode::Domain;
  }

 private:
  ErrorCode code_;
};

}  // namespace aging
