#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adams {

/// Shortest round-trip decimal form ('.' separator, locale independent). NaN -> "nan".
std::string format_double(double value);
double parse_double(std::string_view text);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Minimal CSV table: header row plus string cells. No quoting; fields never contain commas.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const;
    static CsvTable parse(std::string_view text);
    std::size_t column(std::string_view name) const;
};

}  // namespace adams
