// Copyright 2026 The fcdcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
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

namespace fcdcnn {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file contents (bad magic, truncated payload...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent parameters: channel mismatches, invalid configs, D > W.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shapes that cannot be combined.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Operation called in the wrong state (e.g. backward without forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Input that admits no meaningful result: empty segmentations, exhausted
/// sampling, metrics without valid ground truth, non-finite training loss.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace fcdcnn
