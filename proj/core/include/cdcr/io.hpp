#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cdcr::io {

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to <path>.tmp.<pid> in the same directory, then renames over the
// target so readers never observe a half-written file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

// FNV-1a 64-bit content hash, rendered as 16 hex chars. Used in output
// manifests for audit, not for security.
std::uint64_t fnv1a64(std::string_view data);
std::string hash_hex(std::string_view data);
std::string hash_file_hex(const std::filesystem::path& path);

}  // namespace cdcr::io
