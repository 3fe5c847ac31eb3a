#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace factline::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields, embedded commas, doubled quotes and
// embedded line breaks. Accepts both \n and \r\n line endings.
std::vector<Row> parse(std::istream& in);
std::vector<Row> parse_file(const std::filesystem::path& path);

// Quotes a field only when needed.
std::string escape(const std::string& field);
std::string format_row(const Row& row);
void write(std::ostream& out, const std::vector<Row>& rows);

// Fixed-precision float formatting so emitted reports are byte-stable.
std::string format_double(double v, int precision = 6);

}  // namespace factline::csv
