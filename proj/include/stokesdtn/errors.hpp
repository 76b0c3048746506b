#pragma once

#include <stdexcept>
#include <string>

namespace stokesdtn {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration or misuse of a module contract (CLI exit code 2).
struct UsageError : Error {
  using Error::Error;
};

// Jets from different spaces (base point / variable layout / max order).
struct IncompatibleJetsError : UsageError {
  using UsageError::UsageError;
};

// Reciprocal of a jet with zero constant term, sqrt of a non-positive one,
// or a base metric that is not positive definite.
struct SingularInputError : Error {
  using Error::Error;
};

// An operation would produce a result with no trustworthy coefficients.
struct OrderExhaustedError : Error {
  using Error::Error;
};

// Direction set does not span the symmetric-form space, or a response
// system lost rank.
struct RankDeficiencyError : Error {
  using Error::Error;
};

}  // namespace stokesdtn
