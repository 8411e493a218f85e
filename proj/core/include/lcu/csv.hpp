#pragma once

#include <string>
#include <vector>

#include "lcu/types.hpp"

namespace lcu {

struct CsvData {
  Matrix values;
  std::vector<std::string> column_names;  // empty when the file has no header
};

// Parse a rectangular numeric CSV (comma-separated, LF or CRLF). Errors name
// the offending 1-based row/column. standardize rescales each column to mean 0
// and variance 1 (divisor n-1); zero-variance columns are rejected by name.
CsvData parse_csv(const std::string& text, bool has_header, bool standardize);
CsvData ingest_csv(const std::string& path, bool has_header, bool standardize);

// Output table schema: experiment,param1,param2,metric,value,reps,stderr.
struct TableRow {
  std::string experiment;
  double param1 = 0.0;
  double param2 = 0.0;
  std::string metric;
  double value = 0.0;
  int reps = 1;
  double std_error = 0.0;
};

std::string serialize_table(const std::vector<TableRow>& rows);
std::vector<TableRow> parse_table(const std::string& text);

// Per-coordinate dump schema: j,statistic,approx,exact,error.
struct PerCoordRow {
  Index j = 0;
  std::string statistic;
  double approx = 0.0;
  double exact = 0.0;
  double error = 0.0;
};

std::string serialize_percoord(const std::vector<PerCoordRow>& rows);

// Shortest decimal form that round-trips a double exactly.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace lcu
