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

#include "slim/layout.hpp"
#include "slim/mask.hpp"
#include "slim/scene.hpp"

namespace slim::oracle {

// Independent reference construction of the full-sequence mask: scalar loops,
// full sorts, every entry decided one at a time from the block rules. Shares
// only the domain types with the fast path; kept in its own module so the two
// implementations cannot drift into each other. Used by the verification
// suites, which require exact equality with compose() on tie-free scenes.
AttentionMask reference_mask(const SceneObjects& scene, const TokenLayout& layout, const MaskStrategy& strategy);

} // namespace slim::oracle
