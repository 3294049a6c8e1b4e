/*
   Copyright 2026 The zpfsim Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace zpfsim {

/// Invalid user input: bad configuration, malformed file, rejected request.
/// The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (dimension mismatch, missing
/// samples). Programming error rather than bad data.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A numeric post-condition could not be met (residual above tolerance,
/// acceptance criterion failed). The CLI maps it to exit code 3.
class NumericContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calibration constants put a detection-probability target outside [0,1].
class CalibrationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Request outside the exactly supported range (e.g. moment order > 8).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An estimator has no defined value for the supplied data (zero denominator).
class UndefinedEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace zpfsim
