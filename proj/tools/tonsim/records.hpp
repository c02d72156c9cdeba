#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spec.hpp"

namespace tonsim::cli {

/// One output cell. monostate is a missing value: empty in CSV, null in JSON.
using Value = std::variant<std::monostate, double, std::int64_t, std::uint64_t, bool, std::string>;

/// Homogeneous records: every row has one value per column, in column order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
};

Value opt(const std::optional<double>& x);

/// CSV: one header row, doubles with 17 significant digits (NaN as "nan").
void write_csv(std::ostream& out, const Table& table);

/// JSON Lines: one object per row, keys in column order, NaN as null.
void write_json(std::ostream& out, const Table& table);

void write_table(std::ostream& out, const Table& table, Format format);

/// Rows of a previously emitted table, as column name -> text. Detects JSON
/// Lines by a leading '{', CSV otherwise. Throws InvalidParameter on I/O or
/// shape errors, naming the path.
struct TextTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws InvalidParameter naming the source if absent.
  std::size_t column(const std::string& name) const;
  std::optional<std::size_t> find_column(const std::string& name) const;
  std::string source;
};

TextTable read_table(const std::string& path);

/// Parses a numeric cell; "nan" and empty cells are NaN.
double cell_number(const TextTable& table, std::size_t row, std::size_t col);

}  // namespace tonsim::cli
