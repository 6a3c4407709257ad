#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tablesage/dataset.hpp"

namespace tablesage {

enum class InputFormat { kColumn, kText, kTable };

std::string_view to_string(InputFormat format);
// Throws ArgumentError on anything but column, text or table.
InputFormat parse_format(std::string_view name);

struct SerializeOptions {
  // Cells longer than this many characters are cut before serialization.
  std::size_t cell_cap = 200;
  // Strict mode rejects a column whose selected cells are all empty.
  bool strict = true;
};

struct SerializedInput {
  InputFormat format = InputFormat::kColumn;
  std::string payload;
  // 1 for column and text inputs.
  std::size_t n_columns = 1;
  // Set when lenient mode accepted an all-empty column.
  bool degenerate = false;

  bool operator==(const SerializedInput&) const = default;
};

// Trimmed, whitespace-collapsed, capped cell text. Shared by both formats.
std::string clean_cell(std::string_view cell, std::size_t cell_cap);

// Non-empty cleaned cells of the first n_rows values joined by one space.
// `format` must be kColumn or kText; the payload is identical for both.
SerializedInput serialize_column(const Column& column, std::size_t n_rows,
                                 InputFormat format = InputFormat::kColumn,
                                 const SerializeOptions& options = {});

// Header line "Column 1 || ... || Column k || \n" followed by one
// "cell || cell ||\n" line per row. A literal "||" inside a cell becomes "\| \|".
SerializedInput serialize_table(const Table& table, std::size_t n_rows,
                                const SerializeOptions& options = {});

// Parser side of the table wire format: cells of one data line, with or
// without its trailing newline.
std::vector<std::string> split_table_line(std::string_view line);

// ceil(characters / 4).
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_serialized_width(const SerializedInput& input);

}  // namespace tablesage
