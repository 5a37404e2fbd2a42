// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace urllc {

// Raised for out-of-domain arguments (bad counts, negative sizes, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Internal numeric failure; the CLI maps it to exit code 3.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularCovariance : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class UnreachableReliability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrajectoryExitsRoom : public std::domain_error {
 public:
  TrajectoryExitsRoom(double t, const std::string& what)
      : std::domain_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace detail
}  // namespace urllc
