// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace preqsel {

/// Rectangular CSV table with a fixed header. Cells are stored as already
/// formatted strings; commas and newlines inside cells are rejected.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {
    if (header_.empty()) {
      throw std::invalid_argument("CsvTable: empty header");
    }
    for (const auto& name : header_) check_cell(name);
  }

  void add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) {
      throw std::invalid_argument("CsvTable: row width does not match header");
    }
    for (const auto& cell : cells) check_cell(cell);
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  std::string to_string() const {
    std::string text = join(header_);
    for (const auto& row : rows_) {
      text += join(row);
    }
    return text;
  }

 private:
  static void check_cell(const std::string& cell) {
    if (cell.find(',') != std::string::npos ||
        cell.find('\n') != std::string::npos) {
      throw std::invalid_argument("CsvTable: cell contains comma or newline");
    }
  }

  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }

  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Fixed scientific format with 15 significant digits, so downstream fits
/// are never quantisation-limited.
inline std::string csv_real(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.14e", value);
  return buffer;
}

inline std::string csv_count(long long value) {
  return std::to_string(value);
}

}  // namespace preqsel
