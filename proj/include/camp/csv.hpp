#pragma once

#include "camp/errors.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace camp {

// Append-oriented CSV writer with a fixed header.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
            bool append = false)
      : os_(path, append ? std::ios::app : std::ios::trunc), n_cols_(columns.size()) {
    if (!os_) throw DataError("CsvWriter: cannot open " + path.string());
    if (!append || std::filesystem::file_size(path) == 0) {
      for (std::size_t i = 0; i < columns.size(); ++i) {
        os_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
      }
    }
  }

  void row(const std::vector<double>& values) {
    if (values.size() != n_cols_) throw DataError("CsvWriter: column count mismatch");
    os_.precision(12);
    for (std::size_t i = 0; i < values.size(); ++i) {
      os_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }
  }

  void flush() { os_.flush(); }

 private:
  std::ofstream os_;
  std::size_t n_cols_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return int(i);
    }
    throw DataError("CsvTable: no column named '" + name + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("read_csv: cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw DataError("read_csv: empty file " + path.string());
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size()) throw DataError("read_csv: ragged row in " + path.string());
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace camp
