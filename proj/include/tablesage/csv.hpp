#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tablesage::csv {

using Row = std::vector<std::string>;

// RFC 4180 reader: quoted fields may hold commas, quotes ("") and newlines.
// Accepts LF or CRLF line endings. A trailing newline does not yield an empty row.
// Throws LoadError on an unterminated quoted field.
std::vector<Row> parse(std::string_view content);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape_field(std::string_view field);

// One LF-terminated line.
std::string format_row(const Row& row);

}  // namespace tablesage::csv
