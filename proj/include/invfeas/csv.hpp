#ifndef INVFEAS_CSV_HPP
#define INVFEAS_CSV_HPP

#include <ostream>
#include <string>
#include <vector>

namespace invfeas {

/// Header row plus numeric rows, '.' radix, ',' separator, '\n' line ends.
/// Values are serialized with 17 significant digits so a parse-back is
/// bit-exact.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;

  static std::string format_value(double v);
  static CsvTable read(std::istream& in);
};

}  // namespace invfeas

#endif
