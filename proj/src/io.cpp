#include "stmax/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace stmax {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("invalid number '" + s + "' on line " + std::to_string(line));
  }
  return v;
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

void write_field_csv(std::ostream& out, const FieldSample& field) {
  if (!field.grid) throw std::invalid_argument("write_field_csv: field has no grid");
  const SpaceTimeGrid& grid = *field.grid;
  if (field.values.size() != grid.size()) {
    throw std::invalid_argument("write_field_csv: value count does not match grid");
  }
  std::string text = "s1,s2,t,value\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SpaceTimePoint p = grid.point(i);
    text += format_double(p.s[0]);
    text += ',';
    text += format_double(p.s[1]);
    text += ',';
    text += format_double(p.t);
    text += ',';
    text += format_double(field.values[i]);
    text += '\n';
  }
  out << text;
}

void write_field_csv(const std::filesystem::path& path, const FieldSample& field) {
  std::ostringstream os;
  write_field_csv(os, field);
  write_text_file(path, os.str());
}

std::vector<FieldRow> read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "s1,s2,t,value") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<FieldRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::array<std::string, 4> cells;
    std::size_t start = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t end = c < 3 ? line.find(',', start) : line.size();
      if (end == std::string::npos) {
        throw std::runtime_error("too few columns on line " + std::to_string(lineno));
      }
      cells[c] = line.substr(start, end - start);
      start = end + 1;
    }
    rows.push_back({parse_double(cells[0], lineno), parse_double(cells[1], lineno),
                    parse_double(cells[2], lineno), parse_double(cells[3], lineno)});
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  add_row(header);
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::invalid_argument("CsvTable: wrong number of cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

std::string CsvTable::str() const { return text_; }

}  // namespace stmax
