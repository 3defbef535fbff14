#include "agnostic/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace agnostic {
namespace {

// Reads the next header token, skipping whitespace and `#` comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    ++pos;
  }
  return bytes.substr(start, pos - start);
}

std::size_t header_number(const std::string& bytes, std::size_t& pos,
                          const std::filesystem::path& path, const char* what) {
  const std::string token = next_token(bytes, pos);
  if (token.empty() || !std::all_of(token.begin(), token.end(), ::isdigit)) {
    throw FormatError(path.string() + ": bad PGM " + what + " '" + token + "'");
  }
  return std::stoul(token);
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw FormatError(path.string() + ": not a binary PGM (P5)");
  GrayImage image;
  image.width = header_number(bytes, pos, path, "width");
  image.height = header_number(bytes, pos, path, "height");
  const std::size_t maxval = header_number(bytes, pos, path, "maxval");
  if (image.width == 0 || image.height == 0) throw FormatError(path.string() + ": empty image");
  if (maxval != 255) {
    throw FormatError(path.string() + ": only maxval 255 is supported, got " +
                      std::to_string(maxval));
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw FormatError(path.string() + ": missing whitespace after header");
  }
  ++pos;
  const std::size_t count = image.width * image.height;
  if (bytes.size() - pos != count) {
    throw FormatError(path.string() + ": expected " + std::to_string(count) +
                      " pixel bytes, found " + std::to_string(bytes.size() - pos));
  }
  image.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return image;
}

GrayImage to_gray(const Tensor& t) {
  GrayImage image;
  if (t.rank() == 2) {
    image.height = t.dim(0);
    image.width = t.dim(1);
  } else if (t.rank() == 3 && t.dim(0) == 1) {
    image.height = t.dim(1);
    image.width = t.dim(2);
  } else {
    throw ShapeError("to_gray: expected [H, W] or [1, H, W], got " + shape_string(t.shape()));
  }
  image.pixels.reserve(t.size());
  for (double v : t.data()) {
    const double scaled = std::round(255.0 * std::clamp(v, 0.0, 1.0));
    image.pixels.push_back(static_cast<std::uint8_t>(scaled));
  }
  return image;
}

Tensor plane_from_gray(const GrayImage& image) {
  std::vector<double> values(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), values.begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  return Tensor({image.height, image.width}, std::move(values));
}

Tensor image_from_gray(const GrayImage& image) {
  Tensor plane = plane_from_gray(image);
  std::vector<double> values(plane.data().begin(), plane.data().end());
  return Tensor({1, image.height, image.width}, std::move(values));
}

}  // namespace agnostic
