#pragma once

#include <stdexcept>
#include <string>

namespace wavegec {

// Quadrature or ODE stepping failed to reach the requested accuracy.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A hard resource cap (step count, frequency cap, horizon) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checked precondition does not hold for the supplied arguments.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A coefficient was rejected by the class-membership gate.
class MembershipError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The class conserves energy (bounded G*S), so no growing construction exists.
class GecClassError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Verification cannot be carried out with the available metadata.
class VerificationImpossibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavegec
