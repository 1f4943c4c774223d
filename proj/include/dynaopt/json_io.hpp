#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace dynaopt {

using ordered_json = nlohmann::ordered_json;

// 17-significant-digit decimal (%.17g); round-trips exactly.
std::string format_double(double value);

// Shortest decimal that parses back to the same double; used where
// human-readable values matter (params files).
std::string format_decimal(double value);

// Serialize with format_double for every number so files are bit-faithful
// and stable across runs. indent < 0 emits a single line.
std::string dump_json(const ordered_json& value, int indent = -1);

ordered_json load_json_file(const std::filesystem::path& path);
void save_json_file(const ordered_json& value, const std::filesystem::path& path, int indent = 2);

}  // namespace dynaopt
