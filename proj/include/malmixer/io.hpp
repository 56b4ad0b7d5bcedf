#pragma once

#include "malmixer/common.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace malmixer {

using json = nlohmann::json;

/// Reads a row-major little-endian float32 matrix. The file must hold exactly
/// rows*cols values; rows == -1 infers the row count from the file size.
MatXf read_f32_matrix(const std::filesystem::path& path, long rows, long cols);

/// Writes a matrix as row-major little-endian float32, no header.
void write_f32_matrix(const std::filesystem::path& path, const MatXf& m);

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& j);

/// Parses ISO-8601 "YYYY-MM-DD" or "YYYY-MM-DDTHH:MM:SS[Z]" into seconds
/// since the epoch (UTC, proleptic Gregorian). Throws Error on malformed input.
std::int64_t parse_iso8601(const std::string& s);

}  // namespace malmixer
