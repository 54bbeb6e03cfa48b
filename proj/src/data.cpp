#include "dvqr/data.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dvqr {

int DataTable::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DataTable parse_table(const std::string& text, char delimiter) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty input: no header row");
  DataTable table;
  for (const auto& h : split_line(line, delimiter)) {
    const std::string name = trim(h);
    if (name.empty()) throw std::invalid_argument("blank column name in header");
    table.names.push_back(name);
  }
  table.cols.assign(table.names.size(), {});
  std::size_t rownum = 1;
  while (std::getline(in, line)) {
    ++rownum;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line, delimiter);
    if (cells.size() != table.names.size()) {
      std::ostringstream msg;
      msg << "row " << rownum << ": expected " << table.names.size()
          << " cells, found " << cells.size();
      throw std::invalid_argument(msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty()) {
        std::ostringstream msg;
        msg << "row " << rownum << ": blank value in column '" << table.names[c]
            << "'";
        throw std::invalid_argument(msg.str());
      }
      std::size_t used = 0;
      double value;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cell.size()) {
        std::ostringstream msg;
        msg << "row " << rownum << ": non-numeric value '" << cell
            << "' in column '" << table.names[c] << "'";
        throw std::invalid_argument(msg.str());
      }
      table.cols[c].push_back(value);
    }
  }
  return table;
}

DataTable read_table(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_table(buf.str(), delimiter);
}

std::string format_table(const DataTable& table, char delimiter) {
  std::ostringstream out;
  for (std::size_t c = 0; c < table.names.size(); ++c) {
    if (c) out << delimiter;
    out << table.names[c];
  }
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < table.nrows(); ++r) {
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      if (c) out << delimiter;
      std::snprintf(buf, sizeof(buf), "%.17g", table.cols[c][r]);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

void write_table(const DataTable& table, const std::string& path,
                 char delimiter) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << format_table(table, delimiter);
}

}  // namespace dvqr
