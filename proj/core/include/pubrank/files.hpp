#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace pubrank {

/// Whole-file helpers; failures are DataErrors naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace pubrank
