#include "agnostic/tensor_io.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace agnostic {
namespace {

constexpr std::size_t kValuesPerLine = 8;

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  out << "shape:";
  for (std::size_t extent : t.shape()) out << ' ' << extent;
  out << '\n';
  char buffer[32];
  auto values = t.data();
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), values[i],
                                   std::chars_format::general, 17);
    out.write(buffer, end - buffer);
    out << ((i + 1) % kValuesPerLine == 0 || i + 1 == values.size() ? '\n' : ' ');
  }
}

Tensor read_tensor(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  if (line.rfind("shape:", 0) != 0) {
    throw std::runtime_error("tensor text: expected 'shape:' header, got '" + line + "'");
  }
  std::istringstream header(line.substr(6));
  Shape shape;
  std::size_t extent = 0;
  while (header >> extent) shape.push_back(extent);
  if (!header.eof()) throw std::runtime_error("tensor text: bad shape line '" + line + "'");
  const std::size_t count = element_count(shape);
  std::vector<double> values;
  values.reserve(count);
  std::string token;
  while (values.size() < count && in >> token) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw std::runtime_error("tensor text: bad value '" + token + "'");
    }
    values.push_back(v);
  }
  if (values.size() != count) {
    throw std::runtime_error("tensor text: expected " + std::to_string(count) +
                             " values, got " + std::to_string(values.size()));
  }
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  return Tensor(std::move(shape), std::move(values));
}

std::string tensor_to_text(const Tensor& t) {
  std::ostringstream out;
  write_tensor(out, t);
  return out.str();
}

Tensor tensor_from_text(const std::string& text) {
  std::istringstream in(text);
  return read_tensor(in);
}

}  // namespace agnostic
