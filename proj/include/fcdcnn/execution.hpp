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

namespace fcdcnn {

/// Selects which kernel namespace the high-level operations dispatch to.
/// Results are bit-reproducible within one mode and thread count.
enum class ExecutionMode { Serial, Parallel };

ExecutionMode execution_mode();
void set_execution_mode(ExecutionMode mode);

class ScopedExecutionMode {
 public:
  explicit ScopedExecutionMode(ExecutionMode mode) : previous_(execution_mode()) {
    set_execution_mode(mode);
  }
  ~ScopedExecutionMode() { set_execution_mode(previous_); }
  ScopedExecutionMode(const ScopedExecutionMode&) = delete;
  ScopedExecutionMode& operator=(const ScopedExecutionMode&) = delete;

 private:
  ExecutionMode previous_;
};

}  // namespace fcdcnn
