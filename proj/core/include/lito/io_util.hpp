#pragma once

#include <cstdint>
#include <string>

namespace lito {

std::string read_text_file(const std::string& path);

// Write via temp file + rename so interrupted runs never leave partial output.
void atomic_write_text(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file_hex(const std::string& path);

}  // namespace lito
