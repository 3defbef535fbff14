#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace agnostic {

// Extents of a tensor, outermost first. Every extent is positive.
using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

// Operand shapes do not conform for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct TensorNode {
  Shape shape;
  std::vector<double> data;
  // Empty until something is accumulated into it.
  std::vector<double> grad;
  bool requires_grad = false;
  // False for outputs of operations recorded on a tape.
  bool is_leaf = true;
  // Set when a gradient reached this node during the current backward pass.
  bool reached = false;
};

// Returns the gradient buffer of `node`, allocating zeros on first use.
std::span<double> grad_buffer(TensorNode& node);

}  // namespace detail

// Dense row-major tensor of doubles. Copies share storage, like a handle;
// use clone() for a deep copy.
class Tensor {
 public:
  // A single zero, shape {1}.
  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor scalar(double value);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return node_->data.size(); }

  std::span<const double> data() const { return node_->data; }
  // Writable view of the values. Only meaningful for leaves; mutating a
  // recorded tensor invalidates the tape it belongs to.
  std::span<double> mutable_data() { return node_->data; }
  double item() const;
  double at(std::size_t flat_index) const { return node_->data.at(flat_index); }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool value);
  bool is_leaf() const { return node_->is_leaf; }

  bool has_grad() const { return !node_->grad.empty(); }
  // Empty span when no gradient has been accumulated.
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return detail::grad_buffer(*node_); }
  void zero_grad();

  // Deep copy of the values; the copy is a leaf without gradient.
  Tensor clone() const;
  // Shares nothing with the tape: a fresh leaf holding the same values.
  Tensor detach() const { return clone(); }

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  const std::shared_ptr<detail::TensorNode>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node)
      : node_(std::move(node)) {}

  std::shared_ptr<detail::TensorNode> node_;

  friend Tensor make_op_result(Shape, std::vector<double>,
                               std::initializer_list<const Tensor*>,
                               std::function<void(std::span<const double>)>);
};

// Receives the gradient of the loss w.r.t. an op's output and accumulates
// the corresponding gradients into the op's inputs.
using BackwardRule = std::function<void(std::span<const double> output_grad)>;

// Records operations executed on the current thread while alive
// (define-by-run). Tapes nest; the innermost one is active. With no active
// tape, operations are evaluated without recording.
class Tape {
 public:
  Tape();
  ~Tape();
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Accumulates d(loss)/d(leaf) into every leaf that requires a gradient.
  // Intermediate gradients are recomputed from scratch on each call, so two
  // calls on the same loss leave leaves with twice the gradient.
  void backward(const Tensor& loss);

  std::size_t size() const { return entries_.size(); }
  void clear() { entries_.clear(); }

  void record(std::shared_ptr<detail::TensorNode> output, BackwardRule rule);

  static Tape* active();

 private:
  struct Entry {
    std::shared_ptr<detail::TensorNode> output;
    BackwardRule rule;
  };
  std::vector<Entry> entries_;
  Tape* previous_;
};

// Builds the output tensor of an operation. When a tape is active and any
// input requires a gradient, the output is recorded with `rule`.
Tensor make_op_result(Shape shape, std::vector<double> values,
                      std::initializer_list<const Tensor*> inputs,
                      BackwardRule rule);

}  // namespace agnostic
