#include "lcu/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lcu {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end)
    throw std::runtime_error("csv: non-numeric cell at row " + std::to_string(row) +
                             ", column " + std::to_string(col));
  return value;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::stringstream ss(text);
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double x) {
  // Try increasing precision until the value round-trips.
  char buf[40];
  if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
    return buf;
  }
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x || (std::isnan(back) && std::isnan(x))) return buf;
  }
  return buf;
}

CsvData parse_csv(const std::string& text, bool has_header, bool standardize) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw std::runtime_error("csv: empty input");

  CsvData out;
  std::size_t first_row = 0;
  if (has_header) {
    out.column_names = split_fields(lines[0]);
    first_row = 1;
  }
  if (lines.size() <= first_row) throw std::runtime_error("csv: no data rows");

  const std::size_t p = split_fields(lines[first_row]).size();
  if (has_header && out.column_names.size() != p)
    throw std::runtime_error("csv: header width does not match data width");
  const std::size_t n = lines.size() - first_row;
  out.values.resize(static_cast<Index>(n), static_cast<Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::string> fields = split_fields(lines[first_row + i]);
    if (fields.size() != p)
      throw std::runtime_error("csv: ragged row " + std::to_string(first_row + i + 1) +
                               " (expected " + std::to_string(p) + " fields, got " +
                               std::to_string(fields.size()) + ")");
    for (std::size_t j = 0; j < p; ++j)
      out.values(static_cast<Index>(i), static_cast<Index>(j)) =
          parse_cell(fields[j], first_row + i + 1, j + 1);
  }

  if (standardize) {
    if (n < 2) throw std::runtime_error("csv: standardization needs >= 2 rows");
    for (Index j = 0; j < out.values.cols(); ++j) {
      auto col = out.values.col(j);
      const double mean = col.mean();
      col.array() -= mean;
      const double var = col.squaredNorm() / static_cast<double>(n - 1);
      if (var <= 0.0) {
        const std::string name =
            has_header ? out.column_names[static_cast<std::size_t>(j)]
                       : "column " + std::to_string(j + 1);
        throw std::runtime_error("csv: zero-variance column rejected: " + name);
      }
      col /= std::sqrt(var);
    }
  }
  return out;
}

CsvData ingest_csv(const std::string& path, bool has_header, bool standardize) {
  return parse_csv(read_text_file(path), has_header, standardize);
}

std::string serialize_table(const std::vector<TableRow>& rows) {
  std::string out = "experiment,param1,param2,metric,value,reps,stderr\n";
  for (const TableRow& r : rows) {
    out += r.experiment + ',' + format_double(r.param1) + ',' +
           format_double(r.param2) + ',' + r.metric + ',' + format_double(r.value) +
           ',' + std::to_string(r.reps) + ',' + format_double(r.std_error) + '\n';
  }
  return out;
}

std::vector<TableRow> parse_table(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.empty() || lines[0] != "experiment,param1,param2,metric,value,reps,stderr")
    throw std::runtime_error("table: missing or malformed header");
  std::vector<TableRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> f = split_fields(lines[i]);
    if (f.size() != 7)
      throw std::runtime_error("table: malformed row " + std::to_string(i + 1));
    TableRow r;
    r.experiment = f[0];
    r.param1 = parse_cell(f[1], i + 1, 2);
    r.param2 = parse_cell(f[2], i + 1, 3);
    r.metric = f[3];
    r.value = parse_cell(f[4], i + 1, 5);
    r.reps = static_cast<int>(parse_cell(f[5], i + 1, 6));
    r.std_error = parse_cell(f[6], i + 1, 7);
    if (!std::isfinite(r.value))
      throw std::runtime_error("table: non-finite value in row " + std::to_string(i + 1));
    if (r.reps < 1)
      throw std::runtime_error("table: reps < 1 in row " + std::to_string(i + 1));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string serialize_percoord(const std::vector<PerCoordRow>& rows) {
  std::string out = "j,statistic,approx,exact,error\n";
  for (const PerCoordRow& r : rows) {
    out += std::to_string(r.j) + ',' + r.statistic + ',' + format_double(r.approx) +
           ',' + format_double(r.exact) + ',' + format_double(r.error) + '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace lcu
