#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fofr/fungrid.hpp"

namespace fofr {

/// On-disk curve collection: a comma-separated table whose header row holds
/// the grid points (optionally preceded by an "id" column) and whose data
/// rows hold one curve each. Lines starting with '#' are metadata and are
/// skipped on input. Values are written with 17 significant digits so a
/// write/read round trip reproduces every double bit for bit.
struct CurveTable {
  GridPtr grid;
  std::vector<std::string> ids;  // empty when the table has no id column
  MatrixXd rows;

  FnSet fnset() const { return FnSet{grid, rows}; }
};

CurveTable parse_curve_table(std::istream& in, const std::string& name);
CurveTable read_curve_table(const std::string& path);

void write_curve_table(std::ostream& os, const GridPtr& grid,
                       const MatrixXd& rows,
                       const std::vector<std::string>* ids,
                       const std::vector<std::string>& metadata);
void write_curve_table_file(const std::string& path, const GridPtr& grid,
                            const MatrixXd& rows,
                            const std::vector<std::string>* ids,
                            const std::vector<std::string>& metadata);

/// Shortest-round-trip decimal formatting (%.17g).
std::string format_double(double v);

/// Strict double parser (locale-independent, full-token). Reports the
/// position as "<name> line L, column C" on failure.
double parse_double_token(const std::string& token, const std::string& name,
                          int line, int column);

/// Splits one CSV line on commas; trims surrounding spaces and a trailing
/// carriage return.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace fofr
