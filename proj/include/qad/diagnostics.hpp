// Copyright 2026 The qadsim Authors
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

#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace qad {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or domain-type invariant violated by the caller.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Errors caused by numerics (poles, divergence, failed searches).
/// The command line maps these to exit status 4.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NoResonanceFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class PhasePole : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class CouplingPole : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class Unreachable : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class TruncationTooSmall : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class IntegratorDiverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class ZeroDetuning : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class DegenerateJacobian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class NoOscillation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Configuration problems. what() starts with the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : Error(key_path + ": " + message), key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

using WarningHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics (transmon regime, dispersive regime, clamped rates).
// Default handler prints to stderr.
void warn(const std::string& message);
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace qad
