#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace ptsa {

/// Read and parse a JSON file. Throws Error{io} when unreadable, Error{parse}
/// on malformed content; both messages include the path.
nlohmann::json load_json_file(const std::string& path);

/// Write pretty-printed JSON, replacing any existing file.
void save_json_file(const std::string& path, const nlohmann::json& j, int indent = 2);

}  // namespace ptsa
