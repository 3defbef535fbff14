#include <gtest/gtest.h>

#include <cmath>

#include "agnostic/gradcheck.hpp"
#include "agnostic/random.hpp"
#include "agnostic/tensor.hpp"
#include "agnostic/tensor_io.hpp"
#include "agnostic/tensor_ops.hpp"

using namespace agnostic;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.mutable_data()) v = rng.uniform(lo, hi);
  return t;
}

// Backward-pass gradient of f at x.
std::vector<double> tape_grad(const std::function<Tensor(const Tensor&)>& f, const Tensor& x0) {
  Tensor x = x0.clone();
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(f(x));
  return {x.grad().begin(), x.grad().end()};
}

void expect_grad_matches(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double tol = 1e-6) {
  const auto analytic = tape_grad(f, x);
  const Tensor numeric = finite_diff_grad([&](const Tensor& p) { return f(p).item(); }, x);
  EXPECT_LE(max_relative_error(analytic, numeric.data()), tol);
}

}  // namespace

TEST(Tensor, ConstructionAndShape) {
  const Tensor t({2, 3}, 1.5);
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
  EXPECT_EQ(t.dim(1), 3u);
  EXPECT_EQ(shape_string(t.shape()), "[2, 3]");
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_DOUBLE_EQ(Tensor::scalar(4.0).item(), 4.0);
  EXPECT_THROW((void)t.item(), ShapeError);
}

TEST(Tensor, CopiesShareStorageCloneDoesNot) {
  Tensor a({2}, 1.0);
  Tensor b = a;
  Tensor c = a.clone();
  a.mutable_data()[0] = 9.0;
  EXPECT_EQ(b.at(0), 9.0);
  EXPECT_EQ(c.at(0), 1.0);
  EXPECT_TRUE(a.same_storage(b));
  EXPECT_FALSE(a.same_storage(c));
}

TEST(TensorOps, AddWithBatchBroadcast) {
  const Tensor a({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor b({3}, std::vector<double>{10, 20, 30});
  const Tensor c = add(a, b);
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
            (std::vector<double>{11, 22, 33, 14, 25, 36}));
  EXPECT_THROW(add(a, Tensor({2})), ShapeError);
}

TEST(TensorOps, MatmulHandComputed) {
  const Tensor a({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor b({3, 2}, std::vector<double>{7, 8, 9, 10, 11, 12});
  const Tensor c = matmul(a, b);
  EXPECT_EQ(c.shape(), (Shape{2, 2}));
  EXPECT_EQ(std::vector<double>(c.data().begin(), c.data().end()),
            (std::vector<double>{58, 64, 139, 154}));
  EXPECT_THROW(matmul(a, a), ShapeError);
}

TEST(TensorOps, ShapeErrorNamesBothShapes) {
  try {
    mul(Tensor({2, 3}), Tensor({4}));
    FAIL();
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos);
    EXPECT_NE(msg.find("[4]"), std::string::npos);
  }
}

TEST(TensorOps, ReductionsAndGather) {
  const Tensor a({2, 2}, std::vector<double>{1, 5, 5, -2});
  EXPECT_DOUBLE_EQ(sum(a).item(), 9.0);
  EXPECT_DOUBLE_EQ(mean(a).item(), 2.25);
  EXPECT_DOUBLE_EQ(max(a).item(), 5.0);
  const std::vector<std::size_t> rows{1, 0, 1};
  const Tensor g = gather_rows(a, rows);
  EXPECT_EQ(g.shape(), (Shape{3, 2}));
  EXPECT_EQ(g.at(0), 5.0);
  EXPECT_EQ(g.at(3), 5.0);
}

TEST(TensorOps, MaxGradientGoesToFirstArgmax) {
  const Tensor a({4}, std::vector<double>{1, 3, 3, 0});
  const auto g = tape_grad([](const Tensor& x) { return max(x); }, a);
  EXPECT_EQ(g, (std::vector<double>{0, 1, 0, 0}));
}

TEST(Tape, GradientsOfComposite) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor w = random_tensor({3, 4}, rng);
    const Tensor b = random_tensor({4}, rng);
    const Tensor x = random_tensor({5, 3}, rng);
    expect_grad_matches([&](const Tensor& p) { return mean(mul(add(matmul(x, p), b), add(matmul(x, p), b))); }, w);
    expect_grad_matches([&](const Tensor& p) { return sum(sub(scale(add(matmul(p, w), b), 0.3), neg(matmul(p, w)))); }, x);
    expect_grad_matches([&](const Tensor& p) { return mean(mul(gather_rows(flatten(reshape(p, {5, 3})), std::vector<std::size_t>{4, 0, 4}), gather_rows(x, std::vector<std::size_t>{1, 2, 3}))); }, x);
  }
}

TEST(Tape, NoRecordingWithoutTapeOrGradient) {
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  const Tensor y = add(x, x);
  EXPECT_TRUE(y.is_leaf());
  Tape tape;
  const Tensor z = add(Tensor({2}, 1.0), Tensor({2}, 2.0));
  EXPECT_EQ(tape.size(), 0u);
  const Tensor w = add(x, x);
  EXPECT_EQ(tape.size(), 1u);
  EXPECT_FALSE(w.is_leaf());
}

TEST(Tape, BackwardRequiresScalarLoss) {
  Tensor x({2}, 1.0);
  x.set_requires_grad(true);
  Tape tape;
  EXPECT_THROW(tape.backward(add(x, x)), ShapeError);
  EXPECT_THROW(tape.backward(Tensor::scalar(1.0)), std::logic_error);
}

TEST(Tape, LeafGradientsAccumulate) {
  Tensor x({1}, 3.0);
  x.set_requires_grad(true);
  Tape tape;
  const Tensor y = mul(x, x);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
  tape.backward(y);
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

TEST(Tape, FanOutSumsContributions) {
  // d/dx (x * x + 2x) = 2x + 2
  Tensor x({1}, 1.5);
  x.set_requires_grad(true);
  Tape tape;
  tape.backward(add(mul(x, x), scale(x, 2.0)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 5.0);
}

TEST(Gradcheck, RelativeError) {
  EXPECT_DOUBLE_EQ(relative_error(1.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_error(2.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_error(0.0, 1e-12), 1e-4);
}

TEST(TensorIo, TextRoundTripIsBitExact) {
  Rng rng(2);
  const Tensor t = random_tensor({3, 2, 5}, rng, -1e6, 1e6);
  const Tensor back = tensor_from_text(tensor_to_text(t));
  EXPECT_EQ(back.shape(), t.shape());
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(back.at(i), t.at(i));
}

TEST(TensorIo, RejectsMalformedText) {
  EXPECT_THROW(tensor_from_text("shape 2\n1 2\n"), std::runtime_error);
  EXPECT_THROW(tensor_from_text("shape: 3\n1 2\n"), std::runtime_error);
  EXPECT_THROW(tensor_from_text("shape: 2\n1 x\n"), std::runtime_error);
}
