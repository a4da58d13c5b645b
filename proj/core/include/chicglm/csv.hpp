#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "chicglm/family.hpp"

namespace chicglm {

// Parsed CSV with a mandatory header row.  line0 records the physical line on
// which each data record started, for error messages that survive quoted
// newlines.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line0;

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_cols() const { return static_cast<int>(header.size()); }
  // -1 when the column is absent
  int col(const std::string& name) const;
  int require_col(const std::string& name) const;
};

// RFC-4180 reader: quoted fields may contain commas, doubled quotes and
// newlines; CRLF and LF both end records; blank lines are skipped.
CsvTable read_csv(std::istream& in, const std::string& source_name);
CsvTable read_csv_file(const std::string& path);

// numeric cell access; errors carry source, line and column name
double cell_double(const CsvTable& table, int row, int col);

// 17 significant digits, enough to round-trip any double
std::string format_double(double x);

// quotes the field iff it contains a comma, quote or newline
std::string csv_escape(const std::string& field);

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

// Splits a table into response / predictors / optional extras.  Predictors are
// every column not named as response, weight or offset, in file order.
struct TableSplit {
  Dataset data;
  Eigen::VectorXd weights;  // empty unless weight_col given
};

TableSplit dataset_from_table(const CsvTable& table, const std::string& response_col,
                              const std::string& weight_col = "",
                              const std::string& offset_col = "");

}  // namespace chicglm
