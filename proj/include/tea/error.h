// Copyright 2026 The TEA Robustness Authors
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

#ifndef TEA_ERROR_H_
#define TEA_ERROR_H_

#include <stdexcept>
#include <string>

namespace tea {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or schema-violating experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A referenced dataset, checkpoint, or data file cannot be resolved.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// The requested attribution method is not available for a classifier.
class UnsupportedMethodError : public Error {
 public:
  using Error::Error;
};

// Classifier and MLM tokenizations cannot be aligned.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

class MlmError : public Error {
 public:
  using Error::Error;
};

// Training finished without beating the majority-class baseline.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, double accuracy, double baseline)
      : Error(what), accuracy_(accuracy), baseline_(baseline) {}

  double accuracy() const { return accuracy_; }
  double baseline() const { return baseline_; }

 private:
  double accuracy_;
  double baseline_;
};

}  // namespace tea

#endif  // TEA_ERROR_H_
