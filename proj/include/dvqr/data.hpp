#pragma once

#include <string>
#include <vector>

namespace dvqr {

/// Column-major numeric table with a header row.
struct DataTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;

  std::size_t nrows() const { return cols.empty() ? 0 : cols[0].size(); }
  std::size_t ncols() const { return cols.size(); }

  /// Index of a named column, -1 if absent.
  int col_index(const std::string& name) const;
};

/// Parse a delimited text file. Every cell must be numeric; blank or malformed
/// cells raise std::invalid_argument naming the offending row.
DataTable read_table(const std::string& path, char delimiter = ',');
DataTable parse_table(const std::string& text, char delimiter = ',');

/// Serialize with %.17g cells (deterministic, round-trip exact).
std::string format_table(const DataTable& table, char delimiter = ',');
void write_table(const DataTable& table, const std::string& path,
                 char delimiter = ',');

}  // namespace dvqr
