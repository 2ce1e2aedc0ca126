#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kita {

// shortest round-trip decimal form, locale-independent ('.' decimal point)
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// "# key: value" comment lines prefixed to CSV payloads
std::string meta_block(const std::vector<std::pair<std::string, std::string>>& kv);

}  // namespace kita
