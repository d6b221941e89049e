// Copyright 2026 The ewer Authors.
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

#ifndef EWER_ERROR_H_
#define EWER_ERROR_H_

#include <stdexcept>
#include <string>

namespace ewer {

// Base for every error raised by the library. The CLI maps these to exit
// code 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (manifest lines, vocab files, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or hyper-parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Tensor shape disagreement inside the NN engine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ewer

#endif  // EWER_ERROR_H_
