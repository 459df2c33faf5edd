#ifndef EASYUQ_CSV_HPP
#define EASYUQ_CSV_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace easyuq {

// Strict numeric CSV: one header row, comma separated, decimal point,
// UTF-8.  Parse errors report the 1-based line number.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column_index(const std::string& name) const;  // throws if absent
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace easyuq

#endif  // EASYUQ_CSV_HPP
