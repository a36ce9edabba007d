// Copyright 2026 The ebm-sphere Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef EBM_ERRORS_H_
#define EBM_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ebm {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(std::string what, long expected, long actual)
      : InvalidArgument(what + ": expected dimension " +
                        std::to_string(expected) + ", got " +
                        std::to_string(actual)) {}
};

// x + step vanished during a retraction.
class DegenerateRetraction : public Error {
 public:
  using Error::Error;
};

// Rejection sampling hit its proposal cap.
class SamplingStalled : public Error {
 public:
  SamplingStalled(std::int64_t proposals, std::int64_t accepted)
      : Error("rejection sampling stalled after " + std::to_string(proposals) +
              " proposals (" + std::to_string(accepted) +
              " accepted, empirical acceptance rate " +
              std::to_string(proposals > 0 ? double(accepted) / double(proposals)
                                           : 0.0) +
              ")"),
        proposals_(proposals),
        accepted_(accepted) {}

  std::int64_t proposals() const { return proposals_; }
  std::int64_t accepted() const { return accepted_; }
  double acceptance_rate() const {
    return proposals_ > 0 ? double(accepted_) / double(proposals_) : 0.0;
  }

 private:
  std::int64_t proposals_;
  std::int64_t accepted_;
};

// An MCMC run would need more steps than its configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite parameter.
class Divergence : public Error {
 public:
  explicit Divergence(int iteration)
      : Error("non-finite parameter at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration / input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ebm

#endif  // EBM_ERRORS_H_
