// Copyright 2026 The QRST Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qrst {

/// Validation errors map to CLI exit code 1, numerical guard trips to 2.
enum class ErrorKind { validation, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), kind_(kind), code_(std::move(code)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorKind kind_;
  std::string code_;
};

#define QRST_DEFINE_ERROR(Name, Kind)                               \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& message)                       \
        : Error(ErrorKind::Kind, #Name, message) {}                 \
  }

// linalg
QRST_DEFINE_ERROR(NonHermitianInput, validation);
QRST_DEFINE_ERROR(NegativeEigenvalue, numerical);
QRST_DEFINE_ERROR(NonSquare, validation);
QRST_DEFINE_ERROR(SingularSystem, numerical);
// qops
QRST_DEFINE_ERROR(DimTooSmall, validation);
QRST_DEFINE_ERROR(IndexOutOfRange, validation);
QRST_DEFINE_ERROR(DimMismatch, validation);
// states
QRST_DEFINE_ERROR(NotPositive, numerical);
QRST_DEFINE_ERROR(CutoffTooSmall, numerical);
QRST_DEFINE_ERROR(NoConvergence, numerical);
// dynamics
QRST_DEFINE_ERROR(StepTooLarge, numerical);
// wigner
QRST_DEFINE_ERROR(CutoffInsufficient, numerical);
// training / tomography
QRST_DEFINE_ERROR(FingerprintMismatch, validation);
QRST_DEFINE_ERROR(NotAState, numerical);
QRST_DEFINE_ERROR(GridMismatch, validation);
QRST_DEFINE_ERROR(DivisionDegenerate, numerical);
QRST_DEFINE_ERROR(NonHermitian, validation);
// noise
QRST_DEFINE_ERROR(GainLengthMismatch, validation);
// harness
QRST_DEFINE_ERROR(SchemaVersionMismatch, validation);
QRST_DEFINE_ERROR(ConfigError, validation);
QRST_DEFINE_ERROR(EmptyInput, validation);

#undef QRST_DEFINE_ERROR

}  // namespace qrst
