#pragma once

// Field and table output: UTF-8 CSV with LF line endings and shortest
// round-trip decimal formatting, plus JSON sidecars.

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "stmax/gaussfield.hpp"

namespace stmax {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

struct FieldRow {
  double s1;
  double s2;
  double t;
  double value;
};

/// Header `s1,s2,t,value`, one row per grid point in flattening order.
void write_field_csv(std::ostream& out, const FieldSample& field);
void write_field_csv(const std::filesystem::path& path, const FieldSample& field);
std::vector<FieldRow> read_field_csv(const std::filesystem::path& path);

/// Writes `text` verbatim (binary mode, so LF stays LF).
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<std::string>& cells);
  std::string str() const;

 private:
  std::size_t columns_;
  std::string text_;
};

}  // namespace stmax
