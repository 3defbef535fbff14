#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "agnostic/activation_map.hpp"
#include "agnostic/layers.hpp"
#include "agnostic/metrics.hpp"
#include "agnostic/probe.hpp"
#include "agnostic/sweep.hpp"

using namespace agnostic;

namespace {

ActivationMap map_of(Shape shape, std::vector<double> values) {
  return ActivationMap{Tensor(std::move(shape), std::move(values))};
}

// Two well separated clusters per label along every axis, or a constant.
Tensor features_for(const std::vector<int>& labels, bool informative, Rng& rng) {
  Tensor z({labels.size(), 4});
  auto d = z.mutable_data();
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < 4; ++j)
      d[i * 4 + j] = informative ? (labels[i] == 0 ? -1.0 : 1.0) + 0.1 * rng.uniform(-1, 1) : 0.5;
  return z;
}

std::vector<int> alternating(std::size_t n) {
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i % 2);
  return v;
}

}  // namespace

TEST(Metrics, ArgmaxTiesGoLow) {
  EXPECT_EQ(argmax(std::vector<double>{0.3, 0.7}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0.5, 0.5}), 0u);
  EXPECT_EQ(argmax(std::vector<double>{1.0, 3.0, 3.0}), 1u);
}

TEST(Metrics, AccuracyOfFourExamples) {
  const Tensor logits({4, 2}, {2.0, 1.0, 0.0, 3.0, 1.0, 1.0, 5.0, -5.0});
  const std::vector<int> labels{0, 1, 1, 1};
  EXPECT_DOUBLE_EQ(accuracy_from_logits(logits, labels), 0.5);
  EXPECT_THROW(accuracy_from_logits(Tensor(Shape{0, 2}), std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(accuracy_from_logits(logits, std::vector<int>{0, 1}), std::exception);
}

TEST(Probe, ConstantRepresentationIsAtChance) {
  Rng rng(4);
  const auto train_y = alternating(200), test_y = alternating(100);
  const Tensor train = features_for(train_y, false, rng), test = features_for(test_y, false, rng);
  const double acc = probe_representation(train, train_y, test, test_y, {LayerSpec::dense(8), LayerSpec::relu()},
                                          2, ProbeConfig{});
  EXPECT_DOUBLE_EQ(acc, 0.5);
}

TEST(Probe, SeparableRepresentationIsRead) {
  Rng rng(5);
  const auto train_y = alternating(200), test_y = alternating(100);
  const Tensor train = features_for(train_y, true, rng), test = features_for(test_y, true, rng);
  const double acc = probe_representation(train, train_y, test, test_y, {LayerSpec::dense(8), LayerSpec::relu()},
                                          2, ProbeConfig{});
  EXPECT_GE(acc, 0.99);
  EXPECT_THROW(probe_representation(train, train_y, Tensor({3, 5}), alternating(3), {}, 2, ProbeConfig{}),
               ShapeError);
}

TEST(Probe, LayersDropTheReversal) {
  Architecture arch = default_architecture();
  const auto layers = probe_layers(arch);
  EXPECT_EQ(layers.size() + 1, arch.protected_head.size());
  for (const LayerSpec& l : layers) EXPECT_NE(l.kind, LayerKind::grl);
}

TEST(ActivationMap, UpsampleOfTwoByTwo) {
  // Channel max of two 2x2 planes, nearest upsampled to 4x4.
  const Tensor fm({2, 2, 2}, {1, 2, 0, 1, 0, 1, -1, 0});
  const Tensor plane = channel_max(fm);
  EXPECT_EQ(plane.data()[0], 1.0);
  EXPECT_EQ(plane.data()[1], 2.0);
  const ActivationMap m = map_from_features(fm, 4, 4);
  const std::vector<double> expected{0.5, 0.5, 1, 1, 0.5, 0.5, 1, 1, 0, 0, 0.5, 0.5, 0, 0, 0.5, 0.5};
  ASSERT_EQ(m.values.shape(), (Shape{4, 4}));
  for (std::size_t i = 0; i < 16; ++i) EXPECT_DOUBLE_EQ(m.values.at(i), expected[i]) << i;
}

TEST(ActivationMap, NormalizeClampsAndKeepsZero) {
  const Tensor n = normalize_max(Tensor({3}, {-2.0, 1.0, 4.0}));
  EXPECT_EQ(n.at(0), 0.0);
  EXPECT_EQ(n.at(1), 0.25);
  EXPECT_EQ(n.at(2), 1.0);
  const Tensor z = normalize_max(Tensor({2}, {-1.0, 0.0}));
  EXPECT_EQ(z.at(0), 0.0);
  EXPECT_EQ(z.at(1), 0.0);
}

TEST(ActivationMap, InvariantToChannelOrder) {
  Rng rng(2);
  Tensor fm({3, 4, 4});
  for (double& v : fm.mutable_data()) v = rng.uniform(-1, 1);
  Tensor permuted({3, 4, 4});
  const std::size_t order[3] = {2, 0, 1};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 16; ++i) permuted.mutable_data()[c * 16 + i] = fm.at(order[c] * 16 + i);
  const ActivationMap a = map_from_features(fm, 8, 8), b = map_from_features(permuted, 8, 8);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_EQ(a.values.at(i), b.values.at(i));
}

TEST(ActivationMap, InMaskMassOfToyMap) {
  // Top 10% of 16 pixels is k = 2: the two largest values.
  std::vector<double> v(16, 0.1);
  v[5] = 1.0;
  v[6] = 0.9;
  v[0] = 0.5;
  Tensor mask({4, 4});
  mask.mutable_data()[5] = 1.0;
  EXPECT_DOUBLE_EQ(in_mask_mass(map_of({4, 4}, v), mask), 0.5);
  mask.mutable_data()[6] = 1.0;
  EXPECT_DOUBLE_EQ(in_mask_mass(map_of({4, 4}, v), mask), 1.0);
  // Ties at the threshold all count: 3 pixels share the second value.
  v[0] = 0.9;
  v[1] = 0.9;
  EXPECT_DOUBLE_EQ(in_mask_mass(map_of({4, 4}, v), mask), 0.5);
  EXPECT_EQ(in_mask_mass(map_of({4, 4}, std::vector<double>(16, 0.0)), mask), 0.0);
}

TEST(ActivationMap, PearsonCases) {
  const ActivationMap a = map_of({1, 3}, {0.0, 0.5, 1.0});
  const ActivationMap b = map_of({1, 3}, {1.0, 0.5, 0.0});
  const ActivationMap c = map_of({1, 3}, {0.0, 1.0, 0.5});
  EXPECT_NEAR(compare_maps(a, a), 1.0, 1e-15);
  EXPECT_NEAR(compare_maps(a, b), -1.0, 1e-15);
  // Hand-computed: deviations (-.5, 0, .5) and (-.5, .5, 0) give .25 / .5.
  EXPECT_NEAR(compare_maps(a, c), 0.5, 1e-15);
  EXPECT_EQ(compare_maps(a, map_of({1, 3}, {0.3, 0.3, 0.3})), 0.0);
}

TEST(ActivationMap, LeastCorrelatedOrdering) {
  const ActivationMap up = map_of({1, 3}, {0.0, 0.5, 1.0});
  const ActivationMap down = map_of({1, 3}, {1.0, 0.5, 0.0});
  const ActivationMap mid = map_of({1, 3}, {0.0, 1.0, 0.5});
  const std::vector<ActivationMap> a{up, up, up, up};
  const std::vector<ActivationMap> b{up, down, mid, down};
  EXPECT_EQ(least_correlated(a, b, 3), (std::vector<std::size_t>{1, 3, 2}));
  EXPECT_EQ(least_correlated(a, b, 10).size(), 4u);
}

TEST(Sweep, MeanAndPopulationStd) {
  const MeanStd ms = mean_std(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(ms.mean, 2.5);
  EXPECT_DOUBLE_EQ(ms.std, std::sqrt(1.25));
  const MeanStd same = mean_std(std::vector<double>{0.7, 0.7, 0.7});
  EXPECT_EQ(same.std, 0.0);
}

TEST(Sweep, SummaryGroupsByAlpha) {
  SweepResult r;
  r.rows = {{0.0, 1, 0.9, 0.1, 1.0, 1.0}, {0.0, 2, 0.8, 0.3, 0.8, 0.9}, {0.5, 1, 0.7, 0.6, 0.5, 0.5}};
  const auto summary = r.summary();
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].repeats, 2u);
  EXPECT_DOUBLE_EQ(summary[0].acc_context_test.mean, 0.9);
  EXPECT_NEAR(summary[0].acc_context_test.std, 0.1, 1e-15);
  EXPECT_EQ(summary[1].repeats, 1u);
  EXPECT_EQ(summary[1].probe_acc.std, 0.0);
}

TEST(Sweep, CsvRoundTripIsExact) {
  SweepResult r;
  r.rows = {{0.2, 3, 1.0 / 3.0, 0.1, 0.123456789012345678, 0.5}, {0.8, 4, 0.25, 0.75, 0.5, 0.55}};
  std::stringstream s;
  write_sweep_csv(s, r);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), kSweepHeader);
  const SweepResult back = read_sweep_csv(s);
  ASSERT_EQ(back.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.rows[i].alpha, r.rows[i].alpha);
    EXPECT_EQ(back.rows[i].repeat_seed, r.rows[i].repeat_seed);
    EXPECT_EQ(back.rows[i].acc_target_test, r.rows[i].acc_target_test);
    EXPECT_EQ(back.rows[i].acc_context_test, r.rows[i].acc_context_test);
    EXPECT_EQ(back.rows[i].probe_acc, r.rows[i].probe_acc);
  }
  std::stringstream summary;
  write_sweep_summary(summary, r);
  EXPECT_EQ(summary.str()[0], '#');
}

TEST(Sweep, MalformedCsvThrows) {
  std::stringstream s(std::string(kSweepHeader) + "\n0.1,2,x,0,0,0\n");
  EXPECT_THROW(read_sweep_csv(s), std::exception);
}
