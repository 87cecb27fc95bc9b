//
// Copyright 2026 The WPFL Simulator Authors
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
//

#ifndef WPFL_COMMON_H_
#define WPFL_COMMON_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace wpfl {

// Flat model parameters. The unit of clipping, perturbation, quantization,
// transmission and aggregation.
using ParamVector = std::vector<double>;

// Base of every error raised by the simulator. The CLI maps any of these to a
// nonzero exit code with the message as diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A search or optimization has no admissible solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked before a required value was resolved.
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A decoded value violates its container's invariants.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

}  // namespace wpfl

#endif  // WPFL_COMMON_H_
