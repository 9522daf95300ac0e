#pragma once

#include <stdexcept>
#include <string>

namespace pwlqp {

enum class ErrorCode {
  kDimensionMismatch,
  kNotPositiveDefinite,
  kInvalidArgument,
  kParse,
  kIo,
  kNumericalBreakdown,
  kCapacityExceeded,
};

/// Exception type thrown by every module of the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kDimensionMismatch, what);
}

}  // namespace pwlqp
