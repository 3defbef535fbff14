#include "agnostic/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace agnostic {
namespace {

thread_local Tape* active_tape = nullptr;

void validate_shape(const Shape& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one extent");
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
    }
  }
}

}  // namespace

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t extent : shape) n *= extent;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

namespace detail {

std::span<double> grad_buffer(TensorNode& node) {
  if (node.grad.empty()) node.grad.assign(node.data.size(), 0.0);
  node.reached = true;
  return node.grad;
}

}  // namespace detail

Tensor::Tensor() : Tensor(Shape{1}, 0.0) {}

Tensor::Tensor(Shape shape, double fill)
    : node_(std::make_shared<detail::TensorNode>()) {
  validate_shape(shape);
  node_->data.assign(element_count(shape), fill);
  node_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : node_(std::make_shared<detail::TensorNode>()) {
  validate_shape(shape);
  if (element_count(shape) != values.size()) {
    throw ShapeError("shape " + shape_string(shape) + " holds " +
                     std::to_string(element_count(shape)) + " values, got " +
                     std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{1}, value); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     shape_string(shape()));
  }
  return node_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) {
    throw ShapeError("item() needs a single-element tensor, got " +
                     shape_string(shape()));
  }
  return node_->data[0];
}

Tensor& Tensor::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

void Tensor::zero_grad() {
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor Tensor::clone() const { return Tensor(node_->shape, node_->data); }

Tape::Tape() : previous_(active_tape) { active_tape = this; }

Tape::~Tape() { active_tape = previous_; }

Tape* Tape::active() { return active_tape; }

void Tape::record(std::shared_ptr<detail::TensorNode> output, BackwardRule rule) {
  entries_.push_back(Entry{std::move(output), std::move(rule)});
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must have exactly one element, got shape " +
                     shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument(
        "backward: loss does not depend on any tensor that requires a gradient");
  }
  detail::TensorNode* loss_node = loss.node().get();
  if (loss_node->is_leaf) {
    detail::grad_buffer(*loss_node)[0] += 1.0;
    return;
  }

  std::ptrdiff_t start = -1;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(entries_.size()) - 1; i >= 0; --i) {
    if (entries_[static_cast<std::size_t>(i)].output.get() == loss_node) {
      start = i;
      break;
    }
  }
  if (start < 0) {
    throw std::invalid_argument("backward: loss was not recorded on this tape");
  }

  for (std::ptrdiff_t i = 0; i <= start; ++i) {
    auto& node = *entries_[static_cast<std::size_t>(i)].output;
    node.grad.assign(node.data.size(), 0.0);
    node.reached = false;
  }
  detail::grad_buffer(*loss_node)[0] = 1.0;

  // Entries are appended after their inputs exist, so reverse recording
  // order visits every node after all of its consumers.
  for (std::ptrdiff_t i = start; i >= 0; --i) {
    auto& entry = entries_[static_cast<std::size_t>(i)];
    if (!entry.output->reached) continue;
    entry.rule(entry.output->grad);
  }
}

Tensor make_op_result(Shape shape, std::vector<double> values,
                      std::initializer_list<const Tensor*> inputs,
                      BackwardRule rule) {
  Tensor out(std::move(shape), std::move(values));
  Tape* tape = Tape::active();
  if (tape == nullptr) return out;
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const Tensor* t) { return t->requires_grad(); });
  if (!needs_grad) return out;
  out.node_->requires_grad = true;
  out.node_->is_leaf = false;
  tape->record(out.node_, std::move(rule));
  return out;
}

}  // namespace agnostic
