#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "impedscope/common.hpp"

namespace impedscope {

/// Shortest-roundtrip decimal text for a double, identical to the JSON
/// serialization, so CSV and JSON report the same bytes for the same value.
inline std::string num_str(double v) {
    return nlohmann::json(v).dump();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path);
    require(out.good(), "cannot write: " + path);
    out << content;
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace impedscope
