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

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace slim {

/// 3D object center, meters. Components must be finite.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct SceneObject {
    std::string id;
    Point3 center;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

/// Ordered object list. The list order is the token-sequence order of the
/// objects and is unrelated to geometry. Immutable after construction.
class SceneObjects {
public:
    /// Throws ConfigError unless: at least one object, ids unique and
    /// non-empty, all centers finite.
    explicit SceneObjects(std::vector<SceneObject> objects);

    int size() const { return static_cast<int>(objects_.size()); }
    const SceneObject& object(int i) const { return objects_[static_cast<std::size_t>(i)]; }
    const Point3& center(int i) const { return objects_[static_cast<std::size_t>(i)].center; }
    const std::vector<SceneObject>& objects() const { return objects_; }

    friend bool operator==(const SceneObjects&, const SceneObjects&) = default;

private:
    std::vector<SceneObject> objects_;
};

/// Reads a SLIMSCENE v1 file. Throws ParseError with line/field context, or
/// ConfigError via the SceneObjects invariants (duplicate id, non-finite
/// coordinate).
SceneObjects load_scene(const std::filesystem::path& path);

/// Writes SLIMSCENE v1. Coordinates are printed with enough digits to
/// round-trip doubles exactly.
void save_scene(const SceneObjects& scene, const std::filesystem::path& path);

} // namespace slim
