#include "tablesage/io.hpp"

#include <fstream>
#include <sstream>

#include "tablesage/errors.hpp"

namespace tablesage {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw LoadError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw LoadError("cannot read " + path.string());
  }
  return buffer.str();
}

namespace {

void write_with_mode(const fs::path& path, std::string_view content, std::ios::openmode mode) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error("cannot write " + path.string());
  }
}

}  // namespace

void write_file(const fs::path& path, std::string_view content) {
  write_with_mode(path, content, std::ios::trunc);
}

void append_file(const fs::path& path, std::string_view content) {
  write_with_mode(path, content, std::ios::app);
}

}  // namespace tablesage
