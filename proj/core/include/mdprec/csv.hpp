#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace mdprec {

/// Header plus rows of preformatted cells.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Appends a row; throws DimensionError when its width differs from the header.
    void add_row(std::vector<std::string> row);
    /// Index of a header column; throws InvariantError when absent.
    std::size_t column(const std::string& name) const;
};

/// RFC 4180: CRLF line ends, fields quoted when they contain a comma, quote or
/// line break.
void write_csv(std::ostream& out, const Table& t);
void write_csv(const std::filesystem::path& path, const Table& t);
std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);

/// Shortest round-trip text for doubles.
std::string cell(double v);
std::string cell(std::size_t v);
std::string cell(int v);
std::string cell(bool v);
/// Seconds with millisecond resolution.
std::string seconds_cell(double s);

/// True when every column whose name ends in "_seconds" is ignored and the
/// remaining cells are identical.
bool equal_modulo_timing(const Table& a, const Table& b);

} // namespace mdprec
