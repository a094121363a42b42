// Copyright 2026 The RLNAS Authors.
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

#ifndef RLNAS_ERRORS_HPP
#define RLNAS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rlnas {

// Shape or argument contract broken by the caller.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed architecture string.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Label outside [0, C), or sample index outside the dataset.
class LabelError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// No input->output path of the encoding contributes any weight element.
class EmptyWeightVector : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroNormError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstraintInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss became NaN/Inf during SuperNet training.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rlnas

#endif  // RLNAS_ERRORS_HPP
