#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace spoilkit {

using Json = nlohmann::json;

// Compact dump with sorted keys (nlohmann objects are ordered maps), UTF-8
// output, no trailing newline.
std::string canonical_json(const Json& j);

std::string read_file(const std::filesystem::path& path);

// Splits on '\n', tolerating a trailing '\r'. Blank lines are kept so
// callers can report exact line numbers.
std::vector<std::string> split_lines(std::string_view content);

void write_file(const std::filesystem::path& path, std::string_view content);

// Parses one JSONL record; throws ValidationError naming `where` on failure.
Json parse_json(std::string_view line, std::string_view where);

}  // namespace spoilkit
