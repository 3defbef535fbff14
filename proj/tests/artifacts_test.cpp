#include <gtest/gtest.h>

#include <sstream>

#include "agnostic/checkpoint.hpp"
#include "agnostic/report.hpp"
#include "agnostic/tensor_io.hpp"

using namespace agnostic;

TEST(Checkpoint, RoundTripIsBitExact) {
  const Network net = Network::create(default_architecture(), {1, 32, 32}, 2, 11);
  std::stringstream s;
  save_checkpoint(s, net);
  const Network back = load_checkpoint(s);
  EXPECT_EQ(back.input_shape(), net.input_shape());
  EXPECT_EQ(back.num_classes(), 2u);
  EXPECT_EQ(back.architecture(), net.architecture());
  ASSERT_EQ(back.params().size(), net.params().size());
  for (const auto& entry : net.params().entries()) {
    const Tensor& other = back.params().get(entry.name);
    ASSERT_EQ(other.shape(), entry.value.shape()) << entry.name;
    for (std::size_t i = 0; i < other.size(); ++i) ASSERT_EQ(other.at(i), entry.value.at(i)) << entry.name;
  }
}

TEST(Checkpoint, RejectsWrongMagicAndTruncation) {
  std::stringstream bad("not-a-checkpoint\n");
  EXPECT_THROW(load_checkpoint(bad), std::exception);
  const Network net = Network::create(default_architecture(), {1, 32, 32}, 2, 11);
  std::stringstream s;
  save_checkpoint(s, net);
  const std::string text = s.str();
  std::stringstream cut(text.substr(0, text.size() / 2));
  EXPECT_THROW(load_checkpoint(cut), std::exception);
}

TEST(Report, TextTableAlignsColumns) {
  std::stringstream in("# note\nname,value\nalpha,0.5\nb,12.25\n");
  const CsvTable t = read_csv(in);
  EXPECT_EQ(t.comments.size(), 1u);
  EXPECT_EQ(t.numeric_column("value"), (std::vector<double>{0.5, 12.25}));
  EXPECT_THROW(t.column("missing"), std::out_of_range);
  std::stringstream out;
  write_text_table(out, t);
  std::vector<std::string> lines;
  for (std::string line; std::getline(out, line);)
    if (!line.empty() && line[0] != '#') lines.push_back(line);
  ASSERT_GE(lines.size(), 4u);
  for (const std::string& line : lines) EXPECT_EQ(line.size(), lines[0].size()) << line;
  EXPECT_NE(lines.back().find("12.25"), std::string::npos);
}

TEST(Report, SvgHasSeriesAndErrorBars) {
  SweepResult r;
  r.rows = {{0.0, 1, 0.9, 0.1, 1.0, 1.0}, {0.0, 2, 0.8, 0.3, 0.8, 0.9}, {0.5, 1, 0.7, 0.6, 0.5, 0.5}};
  const Chart chart = alpha_chart(r);
  ASSERT_FALSE(chart.series.empty());
  EXPECT_EQ(chart.series[0].x, (std::vector<double>{0.0, 0.5}));
  std::stringstream out;
  write_svg(out, chart);
  const std::string svg = out.str();
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  for (const Series& s : chart.series) EXPECT_NE(svg.find(s.label), std::string::npos) << s.label;
  EXPECT_EQ(summary_table(r).rows.size(), 2u);
}
