#include "pubrank/files.hpp"

#include <fstream>
#include <iterator>

#include "pubrank/errors.hpp"
#include "pubrank/text.hpp"

namespace pubrank {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("I/O error reading " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("I/O error writing " + path.string());
}

std::string file_sha256(const std::filesystem::path& path) { return text::sha256_hex(read_file(path)); }

}  // namespace pubrank
