#include "invfeas/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace invfeas {

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != header.size())
    throw std::invalid_argument("CsvTable: row width does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_value(row[i]);
    }
    out << '\n';
  }
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("CsvTable: cannot open for writing: " + path);
  write(out);
}

CsvTable CsvTable::read(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CsvTable: empty input");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    table.add_row(std::move(row));
  }
  return table;
}

}  // namespace invfeas
