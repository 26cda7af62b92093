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

#include "slim/layout.hpp"

#include <fstream>
#include <string>

#include "slim/error.hpp"

namespace slim {

TokenLayout::TokenLayout(int n_system, int n_objects, int tokens_per_object, int n_instruction, int n_response)
    : n_system_(n_system),
      n_objects_(n_objects),
      tokens_per_object_(tokens_per_object),
      n_instruction_(n_instruction),
      n_response_(n_response) {
    if (n_system < 0 || n_objects < 0 || n_instruction < 0 || n_response < 0) {
        throw ConfigError("layout segment counts must be non-negative");
    }
    if (tokens_per_object < 1) {
        throw ConfigError("tokens_per_object must be positive");
    }
    if (total() < 1) {
        throw ConfigError("layout describes an empty sequence");
    }
}

int TokenLayout::object_of(int p) const {
    const int rel = p - n_system_;
    if (rel < 0 || rel >= n_object_tokens()) return -1;
    return rel / tokens_per_object_;
}

SegmentSpans segment_spans(const TokenLayout& layout) {
    SegmentSpans s;
    int cursor = 0;
    s.system = {cursor, cursor + layout.n_system()};
    cursor = s.system.end;
    s.object_tokens = {cursor, cursor + layout.n_object_tokens()};
    s.objects.reserve(static_cast<std::size_t>(layout.n_objects()));
    for (int i = 0; i < layout.n_objects(); ++i) {
        s.objects.push_back({cursor, cursor + layout.tokens_per_object()});
        cursor += layout.tokens_per_object();
    }
    s.instruction = {cursor, cursor + layout.n_instruction()};
    cursor = s.instruction.end;
    s.response = {cursor, cursor + layout.n_response()};
    s.total = s.response.end;
    return s;
}

namespace {

int parse_kv_line(std::ifstream& in, const std::filesystem::path& path, int line_no, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing '" + key + "=<int>' line");
    }
    const std::string prefix = key + "=";
    if (line.rfind(prefix, 0) != 0) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected '" + key + "=<int>', got '" +
                         line + "'");
    }
    try {
        std::size_t pos = 0;
        const int v = std::stoi(line.substr(prefix.size()), &pos);
        if (pos != line.size() - prefix.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": cannot parse integer in '" + line + "'");
    }
}

} // namespace

TokenLayout load_layout(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open layout file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "SLIMLAYOUT v1") {
        throw ParseError(path.string() + ":1: expected 'SLIMLAYOUT v1' header");
    }
    const int n_system = parse_kv_line(in, path, 2, "system");
    const int tokens_per_object = parse_kv_line(in, path, 3, "tokens_per_object");
    const int n_objects = parse_kv_line(in, path, 4, "objects");
    const int n_instruction = parse_kv_line(in, path, 5, "instruction");
    const int n_response = parse_kv_line(in, path, 6, "response");
    try {
        return TokenLayout(n_system, n_objects, tokens_per_object, n_instruction, n_response);
    } catch (const ConfigError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_layout(const TokenLayout& layout, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    out << "SLIMLAYOUT v1\n";
    out << "system=" << layout.n_system() << "\n";
    out << "tokens_per_object=" << layout.tokens_per_object() << "\n";
    out << "objects=" << layout.n_objects() << "\n";
    out << "instruction=" << layout.n_instruction() << "\n";
    out << "response=" << layout.n_response() << "\n";
    if (!out) {
        throw ParseError("write failed for '" + path.string() + "'");
    }
}

} // namespace slim
