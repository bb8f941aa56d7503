#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace bathtub::io {

/// A parsed CSV file: header names plus rows of raw cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    bool has_column(const std::string& name) const;
    std::size_t column(const std::string& name) const;  // throws if missing
};

CsvTable read_csv(const std::filesystem::path& path);

/// Parses a cell as double; throws std::invalid_argument with file context on failure.
double parse_double(const std::string& cell);

/// Formats a double with 9 significant digits (fixed output format for reproducible files).
std::string format_g9(double value);

/// Writes a CSV atomically (temp file in the same directory, then rename).
void write_csv_atomic(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

/// Writes arbitrary text atomically (used for JSON exports).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace bathtub::io
