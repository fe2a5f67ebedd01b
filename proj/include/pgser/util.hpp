#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace pgser {

/// Reads a whole file; throws MissingArtifactError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory plus an atomic rename,
/// so readers never observe partial artifacts. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::uint64_t hash_bytes(const void* data, std::size_t n, std::uint64_t seed);
std::string hash_hex(std::uint64_t h);

/// FNV-1a content hash of a file, as 16 hex digits.
std::string file_hash_hex(const std::filesystem::path& path);

/// Fixed-format double: round-trips exactly and is byte-stable.
std::string format_double(double v);

}  // namespace pgser
