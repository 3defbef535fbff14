#include "agnostic/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace agnostic {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

std::string num(double v, int precision = 4) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.*g", precision, v);
  return buffer;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("csv: no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  for (const auto& row : rows) {
    if (c >= row.size() || !is_number(row[c])) {
      throw std::runtime_error("csv: non-numeric value in column '" + name + "'");
    }
    double v = 0.0;
    std::from_chars(row[c].data(), row[c].data() + row[c].size(), v);
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.comments.push_back(line);
      continue;
    }
    auto fields = split_fields(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw std::runtime_error("csv: no header line");
  return table;
}

void write_text_table(std::ostream& out, const CsvTable& table) {
  std::vector<std::size_t> width(table.header.size());
  for (std::size_t c = 0; c < width.size(); ++c) {
    width[c] = table.header[c].size();
    for (const auto& row : table.rows) width[c] = std::max(width[c], row[c].size());
  }
  for (const auto& comment : table.comments) out << comment << '\n';
  auto emit = [&](const std::vector<std::string>& cells, bool header) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (c > 0) out << "  ";
      if (!header && is_number(cells[c]))
        out << pad << cells[c];
      else
        out << cells[c] << (c + 1 < cells.size() ? pad : "");
    }
    out << '\n';
  };
  emit(table.header, true);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& row : table.rows) emit(row, false);
}

void write_svg(std::ostream& out, const Chart& chart) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  double x_min = 0, x_max = 1;
  bool first = true;
  for (const auto& s : chart.series)
    for (double x : s.x) {
      x_min = first ? x : std::min(x_min, x);
      x_max = first ? x : std::max(x_max, x);
      first = false;
    }
  if (x_max == x_min) x_max = x_min + 1;
  const double y_span = chart.y_max > chart.y_min ? chart.y_max - chart.y_min : 1.0;
  auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double y) { return top + ph - (std::clamp(y, chart.y_min, chart.y_min + y_span) - chart.y_min) / y_span * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(chart.title) << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double yv = chart.y_min + y_span * i / 5.0, xv = x_min + (x_max - x_min) * i / 5.0;
    out << "<line x1=\"" << left - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << left + pw << "\" y2=\""
        << py(yv) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << num(yv, 3) << "</text>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << num(xv, 3) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << escape(chart.x_label) << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const Series& s = chart.series[i];
    const char* colour = kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
    for (std::size_t j = 0; j < s.x.size(); ++j) out << (j ? " " : "") << px(s.x[j]) << ',' << py(s.y[j]);
    out << "\"/>\n";
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      out << "<circle cx=\"" << px(s.x[j]) << "\" cy=\"" << py(s.y[j]) << "\" r=\"3\" fill=\""
          << colour << "\"/>\n";
      if (j < s.err.size() && s.err[j] > 0) {
        out << "<line x1=\"" << px(s.x[j]) << "\" y1=\"" << py(s.y[j] - s.err[j]) << "\" x2=\""
            << px(s.x[j]) << "\" y2=\"" << py(s.y[j] + s.err[j]) << "\" stroke=\"" << colour
            << "\"/>\n";
      }
    }
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    out << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35
        << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << escape(s.label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

Chart epoch_chart(const RunReport& report) {
  Chart chart{"Accuracy by epoch", "epoch", "accuracy", 0.0, 1.0, {}};
  Series target{"target head, target test", {}, {}, {}};
  Series context{"protected head, context test", {}, {}, {}};
  for (const EpochMetrics& m : report.rows) {
    target.x.push_back(static_cast<double>(m.epoch));
    target.y.push_back(m.acc_target_test);
    context.x.push_back(static_cast<double>(m.epoch));
    context.y.push_back(m.acc_context_test);
  }
  chart.series = {target, context};
  return chart;
}

Chart alpha_chart(const SweepResult& result) {
  Chart chart{"Accuracy by alpha (mean +/- std)", "alpha", "accuracy", 0.0, 1.0, {}};
  Series target{"target test", {}, {}, {}}, swapped{"target swapped", {}, {}, {}},
      context{"context test", {}, {}, {}}, probe{"probe", {}, {}, {}};
  for (const SweepSummaryRow& s : result.summary()) {
    for (auto [series, m] : {std::pair{&target, s.acc_target_test}, {&swapped, s.acc_target_swapped},
                             {&context, s.acc_context_test}, {&probe, s.probe_acc}}) {
      series->x.push_back(s.alpha);
      series->y.push_back(m.mean);
      series->err.push_back(m.std);
    }
  }
  chart.series = {target, swapped, context, probe};
  return chart;
}

CsvTable summary_table(const SweepResult& result) {
  CsvTable table;
  table.comments.push_back("# mean +/- population std over repeats");
  table.header = {"alpha", "repeats", "target_test", "target_swapped", "context_test", "probe"};
  for (const SweepSummaryRow& s : result.summary()) {
    std::vector<std::string> row{num(s.alpha), std::to_string(s.repeats)};
    for (const MeanStd& m : {s.acc_target_test, s.acc_target_swapped, s.acc_context_test, s.probe_acc})
      row.push_back(num(m.mean) + " +/- " + num(m.std));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace agnostic
