#include "ptsa/json_util.hpp"

#include <fstream>

#include "ptsa/errors.hpp"

namespace ptsa {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::parse, "'" + path + "': " + e.what());
    }
}

void save_json_file(const std::string& path, const nlohmann::json& j, int indent) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << j.dump(indent) << '\n';
    if (!out) throw Error(ErrorCode::io, "write to '" + path + "' failed");
}

}  // namespace ptsa
