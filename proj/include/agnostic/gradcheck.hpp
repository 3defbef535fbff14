#pragma once

#include <functional>
#include <span>

#include "agnostic/tensor.hpp"

namespace agnostic {

// Central-difference gradient of a scalar function:
// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate i.
// `f` is evaluated on perturbed copies of `x`; `x` itself is not modified.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h = 1e-5);

// |a - b| / max(|a|, |b|, floor)
double relative_error(double a, double b, double floor = 1e-8);

// Largest relative_error over corresponding elements.
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

}  // namespace agnostic
