#include "sgcp/output.hpp"

#include "sgcp/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace sgcp {

void OutputSeries::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw IoError("series '" + name + "': row has " + std::to_string(row.size()) +
                  " values, header has " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

int OutputSeries::column_index(const std::string& c) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == c) return static_cast<int>(i);
  }
  throw IoError("series '" + name + "' has no column '" + c + "'");
}

std::vector<double> OutputSeries::column(const std::string& c) const {
  const int i = column_index(c);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[i]);
  return out;
}

std::string format_csv(const OutputSeries& s) {
  std::string out;
  for (std::size_t i = 0; i < s.columns.size(); ++i) {
    if (i) out += ',';
    out += s.columns[i];
  }
  out += '\n';
  char buf[32];
  for (const auto& r : s.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      // Normalize negative zero so equal values print identically.
      std::snprintf(buf, sizeof buf, "%.17g", r[i] == 0.0 ? 0.0 : r[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed for '" + path + "'");
}

void write_outputs(const std::vector<OutputSeries>& series, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  for (const auto& s : series) {
    write_text_file((std::filesystem::path(dir) / (s.name + ".csv")).string(), format_csv(s));
  }
}

}  // namespace sgcp
