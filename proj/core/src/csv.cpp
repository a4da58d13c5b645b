#include "chicglm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chicglm/errors.hpp"

namespace chicglm {

int CsvTable::col(const std::string& name) const {
  for (int j = 0; j < n_cols(); ++j)
    if (header[j] == name) return j;
  return -1;
}

int CsvTable::require_col(const std::string& name) const {
  const int j = col(name);
  if (j < 0) throw validation_error(source + ": no column named '" + name + "'");
  return j;
}

CsvTable read_csv(std::istream& in, const std::string& source_name) {
  CsvTable table;
  table.source = source_name;

  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  bool any_char = false;
  int line = 1;
  int record_line = 1;

  auto end_record = [&]() {
    fields.push_back(cur);
    cur.clear();
    const bool blank = fields.size() == 1 && fields[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(fields);
      } else {
        if (fields.size() != table.header.size())
          throw validation_error(source_name + " line " + std::to_string(record_line) +
                                 ": expected " + std::to_string(table.header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line0.push_back(record_line);
      }
    }
    fields.clear();
    any_char = false;
    record_line = line;
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cur.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cur.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cur.empty())
          throw validation_error(source_name + " line " + std::to_string(line) +
                                 ": quote inside unquoted field");
        in_quotes = true;
        any_char = true;
        break;
      case ',':
        fields.push_back(cur);
        cur.clear();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        if (any_char || !cur.empty() || !fields.empty()) end_record();
        record_line = line;
        break;
      default:
        cur.push_back(c);
        any_char = true;
        break;
    }
  }
  if (in_quotes)
    throw validation_error(source_name + ": unterminated quoted field starting near line " +
                           std::to_string(record_line));
  if (any_char || !cur.empty() || !fields.empty()) end_record();

  if (table.header.empty())
    throw validation_error(source_name + ": missing header row");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  return read_csv(in, path);
}

double cell_double(const CsvTable& table, int row, int col) {
  const std::string& s = table.rows[row][col];
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw validation_error(table.source + " line " + std::to_string(table.line0[row]) +
                           ", column '" + table.header[col] + "': not a number: '" + s + "'");
  return value;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path + " for writing");
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out << ',';
      out << csv_escape(cells[j]);
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) {
    if (r.size() != header.size())
      throw validation_error(path + ": row width " + std::to_string(r.size()) +
                             " does not match header width " + std::to_string(header.size()));
    emit(r);
  }
  if (!out) throw io_error("write failed: " + path);
}

TableSplit dataset_from_table(const CsvTable& table, const std::string& response_col,
                              const std::string& weight_col, const std::string& offset_col) {
  const int yc = table.require_col(response_col);
  const int wc = weight_col.empty() ? -1 : table.require_col(weight_col);
  const int oc = offset_col.empty() ? -1 : table.require_col(offset_col);
  if (yc == wc || yc == oc || (wc >= 0 && wc == oc))
    throw validation_error(table.source + ": response, weight and offset columns must differ");

  std::vector<int> pred_cols;
  for (int j = 0; j < table.n_cols(); ++j)
    if (j != yc && j != wc && j != oc) pred_cols.push_back(j);

  const int n = table.n_rows();
  const int p = static_cast<int>(pred_cols.size());
  TableSplit split;
  split.data.y.resize(n);
  split.data.X.resize(n, p);
  split.data.column_names.reserve(p);
  for (int jj = 0; jj < p; ++jj) split.data.column_names.push_back(table.header[pred_cols[jj]]);
  if (oc >= 0) split.data.offset.resize(n);
  if (wc >= 0) split.weights.resize(n);

  for (int i = 0; i < n; ++i) {
    split.data.y(i) = cell_double(table, i, yc);
    if (wc >= 0) split.weights(i) = cell_double(table, i, wc);
    if (oc >= 0) split.data.offset(i) = cell_double(table, i, oc);
    for (int jj = 0; jj < p; ++jj) split.data.X(i, jj) = cell_double(table, i, pred_cols[jj]);
  }
  return split;
}

}  // namespace chicglm
