#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agnostic/sweep.hpp"
#include "agnostic/trainer.hpp"

namespace agnostic {

// A CSV file read as strings. Lines starting with '#' are kept as comments.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws std::out_of_range when absent.
  std::size_t column(const std::string& name) const;
  std::vector<double> numeric_column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

// Columns padded to their widest cell, numbers right-aligned.
void write_text_table(std::ostream& out, const CsvTable& table);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Optional half-width of an error bar per point.
  std::vector<double> err;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  double y_min = 0.0;
  double y_max = 1.0;
  std::vector<Series> series;
};

// Self-contained SVG line chart with axes, ticks and a legend.
void write_svg(std::ostream& out, const Chart& chart);

// Accuracies of a run report against epoch.
Chart epoch_chart(const RunReport& report);
// Per-alpha mean accuracies with population std error bars.
Chart alpha_chart(const SweepResult& result);
// Per-alpha summary as a table, for the text report.
CsvTable summary_table(const SweepResult& result);

}  // namespace agnostic
