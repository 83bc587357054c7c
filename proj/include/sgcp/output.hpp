#pragma once

// Tabular output series and their CSV serialization.

#include <string>
#include <vector>

namespace sgcp {

struct OutputSeries {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  OutputSeries() = default;
  OutputSeries(std::string n, std::vector<std::string> cols)
      : name(std::move(n)), columns(std::move(cols)) {}

  /// Throws IoError when the row width does not match the header.
  void add_row(std::vector<double> row);
  int column_index(const std::string& column) const;
  std::vector<double> column(const std::string& column) const;
  bool empty() const { return rows.empty(); }
};

/// Header line, then one line per row; %.17g, comma separated, LF endings.
std::string format_csv(const OutputSeries& s);

/// One <name>.csv per series in dir (created if missing). Throws IoError.
void write_outputs(const std::vector<OutputSeries>& series, const std::string& dir);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace sgcp
