// Copyright 2026 The slimattn Authors
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

namespace slim {

/// Applies the SLIM_THREADS cap (if set and positive) to the OpenMP runtime.
/// No-op in serial builds. Safe to call more than once.
void init_threads_from_env();

/// Current worker count (1 in serial builds).
int max_threads();

} // namespace slim
