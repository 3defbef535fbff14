#pragma once

#include <iosfwd>
#include <string>

#include "agnostic/tensor.hpp"

namespace agnostic {

// Text form: a header line `shape: d1 d2 ...` followed by the values in
// row-major order, whitespace separated. Values are printed with 17
// significant digits so reading back reproduces them bit for bit.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

std::string tensor_to_text(const Tensor& t);
Tensor tensor_from_text(const std::string& text);

}  // namespace agnostic
