#include "records.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "tonsim/error.hpp"

namespace tonsim::cli {

Value opt(const std::optional<double>& x) {
  if (x) return *x;
  return std::monostate{};
}

namespace {

std::string csv_cell(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double x) const {
      if (std::isnan(x)) return "nan";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      return buf;
    }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(std::uint64_t x) const { return std::to_string(x); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::ordered_json json_cell(const Value& v) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double x) const {
      if (!std::isfinite(x)) return nullptr;
      return x;
    }
    nlohmann::ordered_json operator()(std::int64_t x) const { return x; }
    nlohmann::ordered_json operator()(std::uint64_t x) const { return x; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string json_text(const nlohmann::ordered_json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[table.columns[i]] = json_cell(row[i]);
    out << obj.dump() << '\n';
  }
}

void write_table(std::ostream& out, const Table& table, Format format) {
  if (format == Format::Csv) {
    write_csv(out, table);
  } else {
    write_json(out, table);
  }
}

std::optional<std::size_t> TextTable::find_column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t TextTable::column(const std::string& name) const {
  if (auto i = find_column(name)) return *i;
  throw InvalidParameter(source + ": missing column '" + name + "'");
}

TextTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("cannot open input '" + path + "'");
  TextTable t;
  t.source = path;
  std::string line;
  std::size_t line_no = 0;
  bool json = false;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (first) {
      json = line.front() == '{';
      first = false;
      if (!json) {
        t.columns = split_csv_line(line);
        continue;
      }
    }
    if (json) {
      nlohmann::ordered_json obj;
      try {
        obj = nlohmann::ordered_json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw InvalidParameter(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
      if (t.columns.empty()) {
        for (const auto& [k, v] : obj.items()) t.columns.push_back(k);
      }
      std::vector<std::string> row;
      for (const auto& c : t.columns) {
        row.push_back(obj.contains(c) ? json_text(obj[c]) : std::string());
      }
      t.rows.push_back(std::move(row));
    } else {
      auto row = split_csv_line(line);
      if (row.size() != t.columns.size()) {
        throw InvalidParameter(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(t.columns.size()) + " fields");
      }
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

double cell_number(const TextTable& table, std::size_t row, std::size_t col) {
  const std::string& s = table.rows[row][col];
  if (s.empty() || s == "nan" || s == "null") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw InvalidParameter(table.source + ": row " + std::to_string(row + 1) + ", column '" +
                           table.columns[col] + "': not a number '" + s + "'");
  }
  return x;
}

}  // namespace tonsim::cli
