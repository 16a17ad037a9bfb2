#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ergochron::csv {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Strict parse of a whole field; throws std::invalid_argument on junk.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Comma-joined fields plus '\n'. Fields must not contain commas, quotes or
/// line breaks; the outputs never need quoting.
std::string row(const std::vector<std::string>& fields);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws std::out_of_range when absent.
    std::size_t column(std::string_view name) const;
};

/// Reads a header-led comma-separated file. Throws std::runtime_error naming
/// the path and line on ragged rows.
Table read(const std::filesystem::path& path);

/// Writes `content` to `path` through a temporary sibling and rename.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace ergochron::csv
