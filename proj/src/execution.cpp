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


#include <atomic>

#include "fcdcnn/execution.hpp"

namespace fcdcnn {

namespace {
std::atomic<ExecutionMode> g_mode{ExecutionMode::Parallel};
}

ExecutionMode execution_mode() { return g_mode.load(std::memory_order_relaxed); }
void set_execution_mode(ExecutionMode mode) { g_mode.store(mode, std::memory_order_relaxed); }

}  // namespace fcdcnn
