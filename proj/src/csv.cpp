#include "fofr/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fofr {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string tok = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto l = tok.find_first_not_of(" \t\r");
    const auto r = tok.find_last_not_of(" \t\r");
    out.push_back(l == std::string::npos ? std::string()
                                         : tok.substr(l, r - l + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double_token(const std::string& token, const std::string& name,
                          int line, int column) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;  // from_chars rejects '+'
  double value = 0.0;
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || begin == end ||
      !std::isfinite(value)) {
    fail(ErrorKind::ParseError,
         name + " line " + std::to_string(line) + ", column " +
             std::to_string(column) + ": not a finite number: '" + token +
             "'");
  }
  return value;
}

CurveTable parse_curve_table(std::istream& in, const std::string& name) {
  std::string line;
  int line_no = 0;

  auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_content_line()) {
    fail(ErrorKind::ParseError, name + ": empty table");
  }

  const std::vector<std::string> header = split_csv_line(line);
  const bool has_ids = !header.empty() && header[0] == "id";
  const int first_col = has_ids ? 1 : 0;
  const int m = static_cast<int>(header.size()) - first_col;
  if (m < 2) {
    fail(ErrorKind::ParseError,
         name + " line " + std::to_string(line_no) +
             ": header needs at least 2 grid points");
  }
  VectorXd points(m);
  for (int c = 0; c < m; ++c) {
    points[c] = parse_double_token(header[static_cast<std::size_t>(
                                       c + first_col)],
                                   name, line_no, c + first_col + 1);
  }

  CurveTable table;
  table.grid = Grid::from_points(std::move(points));

  std::vector<VectorXd> rows;
  while (next_content_line()) {
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != m + first_col) {
      fail(ErrorKind::ParseError,
           name + " line " + std::to_string(line_no) + ": expected " +
               std::to_string(m + first_col) + " fields, got " +
               std::to_string(fields.size()));
    }
    if (has_ids) table.ids.push_back(fields[0]);
    VectorXd row(m);
    for (int c = 0; c < m; ++c) {
      row[c] = parse_double_token(fields[static_cast<std::size_t>(
                                      c + first_col)],
                                  name, line_no, c + first_col + 1);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    fail(ErrorKind::ParseError, name + ": no curves");
  }

  table.rows.resize(static_cast<int>(rows.size()), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    table.rows.row(static_cast<int>(i)) = rows[i].transpose();
  }
  return table;
}

CurveTable read_curve_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::ParseError, path + ": cannot open");
  }
  return parse_curve_table(in, path);
}

void write_curve_table(std::ostream& os, const GridPtr& grid,
                       const MatrixXd& rows,
                       const std::vector<std::string>* ids,
                       const std::vector<std::string>& metadata) {
  for (const auto& meta : metadata) {
    os << "# " << meta << "\n";
  }
  if (ids) os << "id,";
  for (int c = 0; c < grid->size(); ++c) {
    if (c) os << ",";
    os << format_double(grid->points()[c]);
  }
  os << "\n";
  for (int i = 0; i < rows.rows(); ++i) {
    if (ids) os << (*ids)[static_cast<std::size_t>(i)] << ",";
    for (int c = 0; c < rows.cols(); ++c) {
      if (c) os << ",";
      os << format_double(rows(i, c));
    }
    os << "\n";
  }
}

void write_curve_table_file(const std::string& path, const GridPtr& grid,
                            const MatrixXd& rows,
                            const std::vector<std::string>* ids,
                            const std::vector<std::string>& metadata) {
  std::ofstream os(path);
  if (!os) {
    fail(ErrorKind::ParseError, path + ": cannot open for writing");
  }
  write_curve_table(os, grid, rows, ids, metadata);
}

}  // namespace fofr
