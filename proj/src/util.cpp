#include "pgser/util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pgser/errors.hpp"
#include "pgser/rng.hpp"

namespace pgser {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw MissingArtifactError("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StageError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw StageError("short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed) {
  return detail::fnv1a(seed, data, n);
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash_hex(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  return hash_hex(hash_bytes(bytes.data(), bytes.size(), detail::kFnvOffset));
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace pgser
