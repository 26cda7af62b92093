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

#include "slim/scene.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "slim/error.hpp"

namespace slim {

namespace {

std::string where(const std::filesystem::path& path, int line) {
    return path.string() + ":" + std::to_string(line);
}

double parse_coord(const std::string& field, const std::filesystem::path& path, int line, const char* which) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ParseError(where(path, line) + ": cannot parse " + which + " coordinate from '" + field + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(where(path, line) + ": non-finite " + which + " coordinate '" + field + "'");
    }
    return v;
}

// Shortest text that scans back to the same double.
std::string format_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

} // namespace

SceneObjects::SceneObjects(std::vector<SceneObject> objects) : objects_(std::move(objects)) {
    if (objects_.empty()) {
        throw ConfigError("scene must contain at least one object");
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < objects_.size(); ++i) {
        const SceneObject& o = objects_[i];
        if (o.id.empty()) {
            throw ConfigError("object " + std::to_string(i) + " has an empty id");
        }
        if (!seen.insert(o.id).second) {
            throw ConfigError("duplicate object id '" + o.id + "'");
        }
        if (!o.center.finite()) {
            throw ConfigError("object '" + o.id + "' has a non-finite coordinate");
        }
    }
}

SceneObjects load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scene file '" + path.string() + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(where(path, 1) + ": missing SLIMSCENE header");
    }
    std::istringstream header(line);
    std::string magic, version;
    long long count = -1;
    if (!(header >> magic >> version >> count) || magic != "SLIMSCENE" || version != "v1" || count < 1) {
        throw ParseError(where(path, 1) + ": expected 'SLIMSCENE v1 <N>' header, got '" + line + "'");
    }

    std::vector<SceneObject> objects;
    objects.reserve(static_cast<std::size_t>(count));
    int line_no = 1;
    while (static_cast<long long>(objects.size()) < count) {
        if (!std::getline(in, line)) {
            throw ParseError(path.string() + ": expected " + std::to_string(count) + " object lines, found " +
                             std::to_string(objects.size()));
        }
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string id, xs, ys, zs, extra;
        if (!(fields >> id >> xs >> ys >> zs)) {
            throw ParseError(where(path, line_no) + ": expected '<id> <x> <y> <z>', got '" + line + "'");
        }
        if (fields >> extra) {
            throw ParseError(where(path, line_no) + ": trailing field '" + extra + "'");
        }
        SceneObject obj;
        obj.id = id;
        obj.center.x = parse_coord(xs, path, line_no, "x");
        obj.center.y = parse_coord(ys, path, line_no, "y");
        obj.center.z = parse_coord(zs, path, line_no, "z");
        objects.push_back(std::move(obj));
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            throw ParseError(where(path, line_no) + ": unexpected content after " + std::to_string(count) +
                             " objects");
        }
    }

    try {
        return SceneObjects(std::move(objects));
    } catch (const ConfigError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_scene(const SceneObjects& scene, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "SLIMSCENE v1 " << scene.size() << "\n";
    for (const SceneObject& o : scene.objects()) {
        out << o.id << ' ' << format_double(o.center.x) << ' ' << format_double(o.center.y) << ' '
            << format_double(o.center.z) << "\n";
    }
    if (!out) {
        throw ParseError("write failed for '" + path.string() + "'");
    }
}

} // namespace slim
