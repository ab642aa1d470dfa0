#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace myoeval {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

double parse_double(std::string_view text, std::string_view field, std::size_t line_no = 0);
std::int64_t parse_int(std::string_view text, std::string_view field, std::size_t line_no = 0);

// Splits on commas without copying. `out` views into `line`.
void split_csv(std::string_view line, std::vector<std::string_view>& out);

// Writes through a sibling temp file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer);

// 64-bit FNV-1a, used for provenance hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace myoeval
