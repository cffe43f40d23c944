// Copyright 2026 The smd Authors
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

namespace smd {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, unknown builtin names, malformed configurations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The Gram matrix mu(grad f^T grad f) (or eta I + G) cannot be inverted.
class SingularGram : public Error {
 public:
  using Error::Error;
};

/// A moment driver was evaluated on (or beyond) its singular set.
class DriverSingularity : public Error {
 public:
  using Error::Error;
};

class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// A particle update produced a non-finite coordinate.
class NumericOverflow : public Error {
 public:
  using Error::Error;
};

}  // namespace smd
