#include "tablesage/serialize.hpp"

#include <algorithm>

#include "tablesage/errors.hpp"
#include "tablesage/text.hpp"

namespace tablesage {
namespace {

constexpr std::string_view kCellSeparator = " || ";
constexpr std::string_view kHeaderEnd = " || \n";
constexpr std::string_view kRowEnd = " ||\n";
constexpr std::string_view kEscapedBars = "\\| \\|";

std::string escape_bars(std::string cell) {
  std::string out;
  out.reserve(cell.size());
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = cell.find("||", pos);
    if (hit == std::string::npos) {
      out.append(cell, pos, std::string::npos);
      break;
    }
    out.append(cell, pos, hit - pos);
    out.append(kEscapedBars);
    pos = hit + 2;
  }
  return out;
}

}  // namespace

std::string_view to_string(InputFormat format) {
  switch (format) {
    case InputFormat::kColumn:
      return "column";
    case InputFormat::kText:
      return "text";
    case InputFormat::kTable:
      return "table";
  }
  return "column";
}

InputFormat parse_format(std::string_view name) {
  if (name == "column") {
    return InputFormat::kColumn;
  }
  if (name == "text") {
    return InputFormat::kText;
  }
  if (name == "table") {
    return InputFormat::kTable;
  }
  throw ArgumentError("unknown format '" + std::string(name) + "' (expected column, text or table)");
}

std::string clean_cell(std::string_view cell, std::size_t cell_cap) {
  return text::trim(text::utf8_truncate(text::collapse_whitespace(cell), cell_cap));
}

SerializedInput serialize_column(const Column& column, std::size_t n_rows, InputFormat format,
                                 const SerializeOptions& options) {
  if (format == InputFormat::kTable) {
    throw ArgumentError("serialize_column: table format needs serialize_table");
  }
  if (n_rows == 0) {
    throw ArgumentError("serialize_column: n_rows must be at least 1");
  }
  if (column.values.empty()) {
    throw ArgumentError("serialize_column: column has no values");
  }
  std::vector<std::string> cells;
  const std::size_t used = std::min(n_rows, column.values.size());
  for (std::size_t r = 0; r < used; ++r) {
    std::string cell = clean_cell(column.values[r], options.cell_cap);
    if (!cell.empty()) {
      cells.push_back(std::move(cell));
    }
  }
  SerializedInput out;
  out.format = format;
  out.n_columns = 1;
  if (cells.empty()) {
    if (options.strict) {
      throw ArgumentError("serialize_column: column " + std::to_string(column.index) +
                          " has only empty cells in the first " + std::to_string(used) + " rows");
    }
    out.degenerate = true;
    return out;
  }
  out.payload = text::join(cells, " ");
  return out;
}

SerializedInput serialize_table(const Table& table, std::size_t n_rows,
                                const SerializeOptions& options) {
  if (n_rows == 0) {
    throw ArgumentError("serialize_table: n_rows must be at least 1");
  }
  if (table.columns.empty()) {
    throw ArgumentError("serialize_table: table '" + table.table_id + "' has no columns");
  }
  SerializedInput out;
  out.format = InputFormat::kTable;
  out.n_columns = table.n_columns();

  std::vector<std::string> header;
  for (std::size_t c = 0; c < table.n_columns(); ++c) {
    header.push_back("Column " + std::to_string(c + 1));
  }
  out.payload = text::join(header, kCellSeparator);
  out.payload.append(kHeaderEnd);

  const std::size_t used = std::min(n_rows, table.n_rows);
  for (std::size_t r = 0; r < used; ++r) {
    std::vector<std::string> cells;
    for (const auto& column : table.columns) {
      cells.push_back(escape_bars(clean_cell(column.values.at(r), options.cell_cap)));
    }
    out.payload += text::join(cells, kCellSeparator);
    out.payload.append(kRowEnd);
  }
  return out;
}

std::vector<std::string> split_table_line(std::string_view line) {
  if (!line.empty() && line.back() == '\n') {
    line.remove_suffix(1);
  }
  constexpr std::string_view kTrailer = " ||";
  if (line.size() >= 2 && line.substr(line.size() - 2) == "| ") {
    line.remove_suffix(1);
  }
  if (line.size() >= kTrailer.size() && line.substr(line.size() - kTrailer.size()) == kTrailer) {
    line.remove_suffix(kTrailer.size());
  } else if (line.size() >= 2 && line.substr(line.size() - 2) == "||") {
    line.remove_suffix(2);
  }
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t hit = line.find(kCellSeparator, start);
    if (hit == std::string_view::npos) {
      cells.emplace_back(line.substr(start));
      break;
    }
    cells.emplace_back(line.substr(start, hit - start));
    start = hit + kCellSeparator.size();
  }
  return cells;
}

std::size_t estimate_tokens(std::string_view payload) {
  return (text::utf8_length(payload) + 3) / 4;
}

std::size_t estimate_serialized_width(const SerializedInput& input) {
  return estimate_tokens(input.payload);
}

}  // namespace tablesage
