#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace tablesage {

// Whole-file read in binary mode. Throws LoadError naming the file.
std::string read_file(const std::filesystem::path& path);

// Creates parent directories; replaces any existing file. Throws Error on failure.
void write_file(const std::filesystem::path& path, std::string_view content);

void append_file(const std::filesystem::path& path, std::string_view content);

}  // namespace tablesage
