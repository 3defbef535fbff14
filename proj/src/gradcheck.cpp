#include "agnostic/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace agnostic {

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: step must be positive");
  Tensor probe = x.clone();
  Tensor result(x.shape());
  auto values = probe.mutable_data();
  auto out = result.mutable_data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double original = values[i];
    values[i] = original + h;
    const double up = f(probe);
    values[i] = original - h;
    const double down = f(probe);
    values[i] = original;
    out[i] = (up - down) / (2.0 * h);
  }
  return result;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor) {
  if (a.size() != b.size()) {
    throw ShapeError("max_relative_error: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + " elements");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, relative_error(a[i], b[i], floor));
  return worst;
}

}  // namespace agnostic
